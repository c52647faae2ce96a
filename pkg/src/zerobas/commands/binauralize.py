"""binauralize command handler."""

from __future__ import annotations

from argparse import Namespace
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from zerobas.commands.common import EXIT_OK, RunSpec, build_run_spec, list_wavs
from zerobas.dataio import read_trajectory, read_wav, write_wav
from zerobas.errors import InvalidInputError
from zerobas.logging_config import get_logger
from zerobas.pipeline import binauralize
from zerobas.vocoder import DenoisingVocoder

logger = get_logger(__name__)


def render_file(
    spec: RunSpec, vocoder: DenoisingVocoder, input_path: Path, trajectory_path: Path, output_path: Path
) -> Path:
    """渲染单个文件"""
    mono = read_wav(input_path)
    track = read_trajectory(trajectory_path)
    stereo = binauralize(mono, track, spec.pipeline, vocoder, spec.stft, spec.mel)
    write_wav(output_path, stereo, bit_depth=spec.bit_depth)
    logger.info("已渲染 %s -> %s", input_path.name, output_path)
    return output_path


def _batch_jobs(input_dir: Path, trajectory_dir: Path, output_dir: Path) -> list[tuple[Path, Path, Path]]:
    wavs = list_wavs(input_dir)
    if not wavs:
        raise InvalidInputError(f"no .wav files in {input_dir}")
    jobs = []
    missing = []
    for name, wav in wavs.items():
        trajectory = trajectory_dir / f"{wav.stem}.csv"
        if not trajectory.is_file():
            missing.append(trajectory.name)
        jobs.append((wav, trajectory, output_dir / name))
    if missing:
        raise InvalidInputError(f"missing trajectories in {trajectory_dir}: {', '.join(missing)}")
    return jobs


def handle_binauralize(args: Namespace) -> int:
    spec = build_run_spec(args, input=args.input, trajectory=args.trajectory, output=args.output)
    input_path = spec.inputs["input"]
    trajectory_path = spec.inputs["trajectory"]
    assert spec.output is not None

    with spec.build_vocoder() as vocoder:
        if input_path.is_dir():
            jobs = _batch_jobs(input_path, trajectory_path, spec.output)
            logger.info("批量渲染 %d 个文件，并发 %d", len(jobs), spec.jobs)
            with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
                outputs = list(pool.map(lambda job: render_file(spec, vocoder, *job), jobs))
            for path in outputs:
                print(f"[OK] {path}")
            print(f"[OK] 共渲染 {len(outputs)} 个文件")
        else:
            path = render_file(spec, vocoder, input_path, trajectory_path, spec.output)
            print(f"[OK] {path}")
    return EXIT_OK
