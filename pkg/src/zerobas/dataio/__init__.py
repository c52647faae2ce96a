"""音频文件、轨迹/清单表格与片段切分"""

from zerobas.dataio.audio import SUBTYPES, read_wav, resample_audio, write_wav
from zerobas.dataio.segments import cut_segments, segment_bounds
from zerobas.dataio.tables import (
    MANIFEST_COLUMNS,
    TRAJECTORY_COLUMNS,
    EventManifest,
    ManifestEvent,
    read_manifest,
    read_trajectory,
    write_trajectory,
)

__all__ = [
    "MANIFEST_COLUMNS",
    "SUBTYPES",
    "TRAJECTORY_COLUMNS",
    "EventManifest",
    "ManifestEvent",
    "cut_segments",
    "read_manifest",
    "read_trajectory",
    "read_wav",
    "resample_audio",
    "segment_bounds",
    "write_trajectory",
    "write_wav",
]
