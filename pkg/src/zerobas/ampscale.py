"""幅度缩放 (AS)

按平方反比律衰减离声源较远的一侧：
    gain_l = min(1, (D_r / D_l)^2),  gain_r = min(1, (D_l / D_r)^2)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from zerobas.core import FloatArray, SampleTrajectory, Waveform
from zerobas.errors import DegenerateGeometryError, InvalidInputError
from zerobas.logging_config import get_logger

logger = get_logger(__name__)

MIN_EAR_DISTANCE = 1e-6


@dataclass(frozen=True, eq=False)
class GainTrack:
    """逐采样点的左右增益，取值 (0, 1]"""

    gain_l: FloatArray
    gain_r: FloatArray

    def __post_init__(self) -> None:
        gain_l = np.array(self.gain_l, dtype=np.float64).reshape(-1)
        gain_r = np.array(self.gain_r, dtype=np.float64).reshape(-1)
        if gain_l.shape != gain_r.shape:
            raise InvalidInputError("gain tracks must have equal length")
        for gains in (gain_l, gain_r):
            if not np.all(np.isfinite(gains)) or np.any(gains <= 0) or np.any(gains > 1):
                raise InvalidInputError("gains must lie in (0, 1]")
        gain_l.setflags(write=False)
        gain_r.setflags(write=False)
        object.__setattr__(self, "gain_l", gain_l)
        object.__setattr__(self, "gain_r", gain_r)

    def __len__(self) -> int:
        return int(self.gain_l.size)

    def as_matrix(self) -> FloatArray:
        return np.stack([self.gain_l, self.gain_r])


def compute_gains(traj: SampleTrajectory) -> GainTrack:
    """由轨迹计算增益

    Raises:
        DegenerateGeometryError: 任一采样点的耳-源距离小于 1e-6 m
    """
    d_l, d_r = traj.distances()
    degenerate = np.flatnonzero((d_l < MIN_EAR_DISTANCE) | (d_r < MIN_EAR_DISTANCE))
    if degenerate.size:
        raise DegenerateGeometryError(
            f"ear coincides with source at {degenerate.size} sample(s), first at index {int(degenerate[0])}"
        )
    gain_l = np.minimum(1.0, (d_r / d_l) ** 2)
    gain_r = np.minimum(1.0, (d_l / d_r) ** 2)
    logger.debug("AS 增益: 左 %.4f~%.4f, 右 %.4f~%.4f", gain_l.min(), gain_l.max(), gain_r.min(), gain_r.max())
    return GainTrack(gain_l=gain_l, gain_r=gain_r)


def apply_gains(pair: Waveform, gains: GainTrack) -> Waveform:
    """逐采样点乘以增益（增益转换到波形自身精度后相乘）"""
    pair.require_stereo("apply_gains input")
    if pair.num_samples != len(gains):
        raise InvalidInputError(f"waveform has {pair.num_samples} samples, gain track has {len(gains)}")
    scaled = pair.samples * gains.as_matrix().astype(pair.dtype, copy=False)
    return Waveform(scaled, pair.sample_rate)


def amplitude_scaling(pair: Waveform, traj: SampleTrajectory) -> Waveform:
    """AS：compute_gains + apply_gains"""
    traj.require_length(pair.num_samples)
    return apply_gains(pair, compute_gains(traj))
