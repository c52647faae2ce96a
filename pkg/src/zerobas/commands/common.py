"""Shared helpers for CLI command handlers."""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from zerobas.config import Config, FileSettings, load_settings
from zerobas.core import PipelineConfig
from zerobas.errors import (
    AudioFormatError,
    ConfigError,
    InvalidInputError,
    VocoderError,
    ZeroBASError,
)
from zerobas.features import MelConfig, StftConfig
from zerobas.logging_config import get_logger
from zerobas.vocoder import DenoisingVocoder, build_vocoder

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_VOCODER = 4

BIT_DEPTHS = (16, 24, 32)


def exit_code_for(exc: BaseException) -> int:
    """异常类别 -> 退出码"""
    if isinstance(exc, VocoderError):
        return EXIT_VOCODER
    if isinstance(exc, AudioFormatError | OSError):
        return EXIT_IO
    # InvalidInputError / ConfigError 及其余库异常
    return EXIT_INVALID


def run_guarded(handler: Callable[[argparse.Namespace], int], args: argparse.Namespace) -> int:
    """执行命令处理函数，把库异常转换为单行诊断与退出码"""
    try:
        return handler(args)
    except (ZeroBASError, OSError) as e:
        code = exit_code_for(e)
        logger.debug("命令失败", exc_info=True)
        print(f"[ERROR] {type(e).__name__}: {e}", file=sys.stderr)
        return code


@dataclass(frozen=True)
class RunSpec:
    """解析后的命令：流水线配置、特征参数、输入输出路径"""

    command: str
    pipeline: PipelineConfig
    stft: StftConfig = field(default_factory=StftConfig)
    mel: MelConfig = field(default_factory=MelConfig)
    inputs: dict[str, Path] = field(default_factory=dict)
    output: Path | None = None
    endpoint_options: dict[str, Any] = field(default_factory=dict)
    jobs: int = 1
    bit_depth: int = 32

    def build_vocoder(self) -> DenoisingVocoder:
        return build_vocoder(self.pipeline.vocoder, stft_cfg=self.stft, **self.endpoint_options)

    def with_pipeline(self, **overrides: Any) -> RunSpec:
        return replace(self, pipeline=replace(self.pipeline, **overrides))


def add_pipeline_arguments(parser: argparse.ArgumentParser) -> None:
    """binauralize / ablate 共用的流水线参数（默认 None 表示沿用配置文件或内置默认值）"""
    group = parser.add_argument_group("pipeline")
    group.add_argument("--iterations", type=int, default=None, help="声码器迭代次数 N（默认 3）")
    group.add_argument("--noise-level", type=int, default=None, help="噪声等级索引 k（默认 1）")
    group.add_argument(
        "--vocoder",
        type=str,
        default=None,
        help="去噪后端: identity | spectral-gate | external:<host>:<port>（默认 identity）",
    )
    group.add_argument(
        "--gtw", dest="enable_gtw", action=argparse.BooleanOptionalAction, default=None, help="几何时间扭曲"
    )
    group.add_argument("--as", dest="enable_as", action=argparse.BooleanOptionalAction, default=None, help="幅度缩放")
    group.add_argument(
        "--swap-order", action=argparse.BooleanOptionalAction, default=None, help="先精炼单声道，再做 GTW/AS"
    )
    group.add_argument(
        "--noise-init", action=argparse.BooleanOptionalAction, default=None, help="从高斯噪声开始精炼"
    )
    group.add_argument("--seed", type=int, default=None, help="--noise-init 的随机种子（默认 0）")
    group.add_argument("--speed-of-sound", type=float, default=None, help="声速 m/s（默认 343）")
    group.add_argument("--sample-rate", type=int, default=None, help="处理前将输入重采样到该采样率")
    group.add_argument("--fft-size", type=int, default=None, help="条件特征 STFT 帧长（默认 1024）")
    group.add_argument("--hop", type=int, default=None, help="条件特征 STFT 帧移（默认 256）")
    group.add_argument("--mel-bins", type=int, default=None, help="mel 频带数（默认 128）")
    group.add_argument("--vocoder-timeout", type=float, default=None, help="外部声码器超时（秒）")


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="YAML 配置文件（默认读取 ZEROBAS_CONFIG）")
    parser.add_argument("--jobs", type=int, default=None, help="并发数（默认 ZEROBAS_JOBS 或逻辑核数）")


def _merge(base: dict[str, Any], flags: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def _build(factory: Callable[..., Any], values: dict[str, Any], what: str) -> Any:
    try:
        return factory(**values)
    except InvalidInputError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid {what} settings: {e}") from e


def resolve_jobs(args: argparse.Namespace, settings: FileSettings) -> int:
    jobs = getattr(args, "jobs", None) or settings.jobs or Config.get_default_jobs()
    if jobs < 1:
        raise InvalidInputError(f"--jobs must be >= 1, got {jobs}")
    return jobs


def build_run_spec(args: argparse.Namespace, **paths: Path | None) -> RunSpec:
    """合并 参数 > 配置文件 > 默认值，构造 RunSpec"""
    settings = load_settings(getattr(args, "config", None))
    pipeline_flags = {
        "iterations": getattr(args, "iterations", None),
        "noise_level": getattr(args, "noise_level", None),
        "vocoder": getattr(args, "vocoder", None),
        "enable_gtw": getattr(args, "enable_gtw", None),
        "enable_as": getattr(args, "enable_as", None),
        "swap_order": getattr(args, "swap_order", None),
        "noise_init": getattr(args, "noise_init", None),
        "seed": getattr(args, "seed", None),
        "speed_of_sound": getattr(args, "speed_of_sound", None),
        "sample_rate": getattr(args, "sample_rate", None),
    }
    pipeline = _build(PipelineConfig, _merge(settings.pipeline, pipeline_flags), "pipeline")
    stft = _build(
        StftConfig,
        _merge(settings.stft, {"fft_size": getattr(args, "fft_size", None), "hop": getattr(args, "hop", None)}),
        "stft",
    )
    mel = _build(MelConfig, _merge(settings.mel, {"mel_bins": getattr(args, "mel_bins", None)}), "mel")
    endpoint_options = _merge(settings.vocoder_endpoint, {"timeout": getattr(args, "vocoder_timeout", None)})

    if pipeline.swap_order and not pipeline.enable_gtw and not pipeline.enable_as:
        logger.warning("--swap-order 与 --no-gtw --no-as 同时使用时不改变结果")

    bit_depth = write_bit_depth(args)

    output = paths.pop("output", None)
    return RunSpec(
        command=getattr(args, "command", "") or "",
        pipeline=pipeline,
        stft=stft,
        mel=mel,
        inputs={k: v for k, v in paths.items() if v is not None},
        output=output,
        endpoint_options=endpoint_options,
        jobs=resolve_jobs(args, settings),
        bit_depth=bit_depth,
    )


def list_wavs(directory: Path) -> dict[str, Path]:
    """目录下的 WAV 文件，按文件名索引"""
    if not directory.is_dir():
        raise FileNotFoundError(f"directory not found: {directory}")
    return {p.name: p for p in sorted(directory.iterdir()) if p.is_file() and p.suffix.lower() == ".wav"}


def write_bit_depth(args: argparse.Namespace) -> int:
    """--bit-depth（默认 32 bit float）"""
    bit_depth = getattr(args, "bit_depth", None) or 32
    if bit_depth not in BIT_DEPTHS:
        raise InvalidInputError(f"--bit-depth must be one of {BIT_DEPTHS}, got {bit_depth}")
    return bit_depth
