"""dataset-prep command handler."""

from __future__ import annotations

from argparse import Namespace
from collections.abc import Iterable
from pathlib import Path

import numpy as np

from zerobas.commands.common import EXIT_OK, write_bit_depth
from zerobas.core import PoseTrack
from zerobas.dataio import ManifestEvent, cut_segments, read_manifest, read_wav, write_trajectory, write_wav
from zerobas.errors import InvalidInputError, InvalidManifestError
from zerobas.logging_config import get_logger
from zerobas.spatial import DEFAULT_EAR_OFFSET, CoordinateFrame, HeadPose, ears_from_head_pose, spherical_to_cartesian

logger = get_logger(__name__)


def segment_stem(event: ManifestEvent) -> str:
    """输出文件名：<recording_id>_<onset 毫秒，7 位>ms"""
    return f"{event.recording_id}_{round(event.onset_s * 1000):07d}ms"


def _check_unique_stems(events: Iterable[ManifestEvent]) -> None:
    """同一录音同一毫秒起点的事件会写到同一文件，整体拒绝"""
    first_row: dict[str, int] = {}
    clashes: set[int] = set()
    for event in events:
        stem = segment_stem(event)
        if stem in first_row:
            clashes.update((first_row[stem], event.row))
        else:
            first_row[stem] = event.row
    if clashes:
        raise InvalidManifestError(
            "events share an output name (same recording and onset millisecond)", rows=sorted(clashes)
        )


def static_track(event: ManifestEvent, frame: CoordinateFrame, ear_offset: float) -> PoseTrack:
    """听者位于原点、朝向 +x 的静态轨迹"""
    source = frame.to_canonical(spherical_to_cartesian(event.position))
    ear_l, ear_r = ears_from_head_pose(HeadPose.identity(ear_offset=ear_offset))
    return PoseTrack(
        times=np.array([0.0]),
        p_src=source.reshape(1, 3),
        p_ear_l=ear_l.reshape(1, 3),
        p_ear_r=ear_r.reshape(1, 3),
    )


def prepare_dataset(
    recordings_dir: Path,
    manifest_path: Path,
    out_dir: Path,
    *,
    frame: CoordinateFrame = CoordinateFrame.X_FORWARD_Y_LEFT,
    ear_offset: float = DEFAULT_EAR_OFFSET,
    bit_depth: int = 32,
) -> list[tuple[Path, Path]]:
    """切分录音并为每个事件写出 (wav, csv) 对"""
    if not recordings_dir.is_dir():
        raise FileNotFoundError(f"recordings directory not found: {recordings_dir}")
    manifest = read_manifest(manifest_path)
    _check_unique_stems(manifest.events)
    written: list[tuple[Path, Path]] = []
    for recording_id in manifest.recording_ids:
        recording = read_wav(recordings_dir / f"{recording_id}.wav")
        events = manifest.for_recording(recording_id)
        segments = cut_segments(recording, manifest, recording_id)
        for event, (segment, _) in zip(events, segments, strict=True):
            stem = segment_stem(event)
            wav_path = write_wav(out_dir / f"{stem}.wav", segment, bit_depth=bit_depth)
            csv_path = write_trajectory(out_dir / f"{stem}.csv", static_track(event, frame, ear_offset))
            written.append((wav_path, csv_path))
        logger.info("录音 %s: 写出 %d 个片段", recording_id, len(segments))
    return written


def handle_dataset_prep(args: Namespace) -> int:
    try:
        frame = CoordinateFrame(args.frame)
    except ValueError as e:
        raise InvalidInputError(f"unknown coordinate frame {args.frame!r}") from e
    written = prepare_dataset(
        args.recordings,
        args.manifest,
        args.out,
        frame=frame,
        ear_offset=args.ear_offset,
        bit_depth=write_bit_depth(args),
    )
    for wav_path, csv_path in written:
        print(f"[OK] {wav_path.name} + {csv_path.name}")
    print(f"[OK] 共生成 {len(written)} 对文件 -> {args.out}")
    return EXIT_OK
