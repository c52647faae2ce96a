"""serve-vocoder command handler."""

from __future__ import annotations

from argparse import Namespace

from zerobas.commands.common import EXIT_OK
from zerobas.errors import InvalidInputError
from zerobas.features import StftConfig
from zerobas.vocoder import BUILTIN_BACKENDS, build_vocoder
from zerobas.vocoder.server import serve


def handle_serve_vocoder(args: Namespace) -> int:
    backend = args.backend.lower().replace("-", "_")
    if backend not in BUILTIN_BACKENDS:
        raise InvalidInputError(f"serve-vocoder backend must be one of {BUILTIN_BACKENDS}, got {args.backend!r}")
    vocoder = build_vocoder(backend, stft_cfg=StftConfig(fft_size=args.fft_size, hop=args.hop))
    print(f"[INFO] 声码器服务监听 {args.host}:{args.port} (backend={vocoder.name})，Ctrl-C 退出")
    serve(args.host, args.port, vocoder, max_payload=args.max_payload)
    return EXIT_OK
