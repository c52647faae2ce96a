"""按事件清单切分录音"""

from __future__ import annotations

from zerobas.core import Waveform
from zerobas.dataio.tables import EventManifest, ManifestEvent
from zerobas.errors import InvalidManifestError
from zerobas.logging_config import get_logger
from zerobas.spatial import SphericalPosition

logger = get_logger(__name__)


def segment_bounds(event: ManifestEvent, sample_rate: int) -> tuple[int, int]:
    """事件对应的采样区间 [round(onset·S), round(offset·S))"""
    return round(event.onset_s * sample_rate), round(event.offset_s * sample_rate)


def cut_segments(
    recording: Waveform, manifest: EventManifest, recording_id: str
) -> list[tuple[Waveform, SphericalPosition]]:
    """切出该录音的全部事件片段，每个片段带其唯一的声源位置

    重叠事件各自独立输出。

    Raises:
        InvalidManifestError: 存在超出录音时长或为空的区间（列出出错行号）
    """
    events = manifest.for_recording(recording_id)
    bad_rows = []
    bounds = []
    for event in events:
        start, stop = segment_bounds(event, recording.sample_rate)
        if stop > recording.num_samples or stop <= start:
            bad_rows.append(event.row)
        bounds.append((start, stop))
    if bad_rows:
        raise InvalidManifestError(
            f"events exceed recording {recording_id!r} ({recording.duration:.3f}s) or are empty", rows=bad_rows
        )

    segments = [
        (Waveform(recording.samples[:, start:stop], recording.sample_rate), event.position)
        for event, (start, stop) in zip(events, bounds, strict=True)
    ]
    logger.debug("录音 %s: 切出 %d 个片段", recording_id, len(segments))
    return segments
