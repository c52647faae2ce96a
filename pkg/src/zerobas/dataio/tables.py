"""轨迹 CSV 与事件清单 CSV

轨迹文件表头必须完全一致：
    time_s,src_x,src_y,src_z,earl_x,earl_y,earl_z,earr_x,earr_y,earr_z
事件清单表头：
    recording_id,onset_s,offset_s,azimuth,elevation,distance
其中 azimuth / elevation 为角度制（与 DCASE/TUT 标注一致），distance 单位米。
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from zerobas.core import PoseTrack
from zerobas.errors import InvalidInputError, InvalidManifestError
from zerobas.logging_config import get_logger
from zerobas.spatial import SphericalPosition

logger = get_logger(__name__)

TRAJECTORY_COLUMNS = [
    "time_s",
    "src_x",
    "src_y",
    "src_z",
    "earl_x",
    "earl_y",
    "earl_z",
    "earr_x",
    "earr_y",
    "earr_z",
]
MANIFEST_COLUMNS = ["recording_id", "onset_s", "offset_s", "azimuth", "elevation", "distance"]


def _read_csv(path: Path, **kwargs) -> pd.DataFrame:
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        return pd.read_csv(path, encoding="utf-8", skipinitialspace=True, **kwargs)
    except pd.errors.EmptyDataError as e:
        raise InvalidInputError(f"{path}: file is empty") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise InvalidInputError(f"{path}: {e}") from e


def read_trajectory(path: str | Path) -> PoseTrack:
    """读取轨迹 CSV

    Raises:
        InvalidInputError: 表头不符、非数值、空文件或时间戳不严格递增
    """
    path = Path(path)
    df = _read_csv(path)
    if list(df.columns) != TRAJECTORY_COLUMNS:
        raise InvalidInputError(f"{path}: trajectory header must be {','.join(TRAJECTORY_COLUMNS)}")
    if df.empty:
        raise InvalidInputError(f"{path}: trajectory has no rows")
    values = df.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    if np.isnan(values).any():
        bad = sorted({int(r) + 1 for r in np.flatnonzero(np.isnan(values).any(axis=1))})
        raise InvalidInputError(f"{path}: non-numeric values in rows {bad}")
    logger.debug("读取轨迹 %s: %d 帧", path, len(df))
    return PoseTrack(times=values[:, 0], p_src=values[:, 1:4], p_ear_l=values[:, 4:7], p_ear_r=values[:, 7:10])


def write_trajectory(path: str | Path, track: PoseTrack) -> Path:
    """写出轨迹 CSV（必要时创建父目录）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([track.times, track.p_src, track.p_ear_l, track.p_ear_r])
    pd.DataFrame(data, columns=TRAJECTORY_COLUMNS).to_csv(path, index=False, encoding="utf-8")
    return path


@dataclass(frozen=True)
class ManifestEvent:
    """一个语音事件；row 为数据行号（从 1 开始，不含表头）"""

    row: int
    recording_id: str
    onset_s: float
    offset_s: float
    position: SphericalPosition


@dataclass(frozen=True)
class EventManifest:
    events: tuple[ManifestEvent, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[ManifestEvent]:
        return iter(self.events)

    def for_recording(self, recording_id: str) -> list[ManifestEvent]:
        return [event for event in self.events if event.recording_id == recording_id]

    @property
    def recording_ids(self) -> list[str]:
        return sorted({event.recording_id for event in self.events})


def _parse_event(row_number: int, row: pd.Series) -> ManifestEvent | None:
    recording_id = str(row["recording_id"]).strip()
    try:
        onset, offset, azimuth, elevation, distance = (
            float(row[c]) for c in ("onset_s", "offset_s", "azimuth", "elevation", "distance")
        )
    except (TypeError, ValueError):
        return None
    if not recording_id or recording_id == "nan":
        return None
    if not all(np.isfinite([onset, offset, azimuth, elevation, distance])):
        return None
    if not (0 <= onset < offset) or distance <= 0 or abs(elevation) > 90:
        return None
    return ManifestEvent(
        row=row_number,
        recording_id=recording_id,
        onset_s=onset,
        offset_s=offset,
        position=SphericalPosition.from_degrees(azimuth, elevation, distance),
    )


def read_manifest(path: str | Path) -> EventManifest:
    """读取事件清单

    Raises:
        InvalidManifestError: 表头不符或存在非法行（列出全部出错行号）
    """
    path = Path(path)
    df = _read_csv(path, dtype={"recording_id": str})
    if list(df.columns) != MANIFEST_COLUMNS:
        raise InvalidManifestError(f"{path}: manifest header must be {','.join(MANIFEST_COLUMNS)}")

    events: list[ManifestEvent] = []
    bad_rows: list[int] = []
    for index, row in df.iterrows():
        row_number = int(index) + 1  # type: ignore[call-overload]
        event = _parse_event(row_number, row)
        if event is None:
            bad_rows.append(row_number)
        else:
            events.append(event)
    if bad_rows:
        raise InvalidManifestError(f"{path}: invalid manifest rows", rows=bad_rows)
    logger.debug("读取清单 %s: %d 个事件", path, len(events))
    return EventManifest(tuple(events))
