"""几何时间扭曲 (GTW)

对每个声道计算 warpfield ρ(t) = t - (S / ν) · ||p_src(t) - p_ear(t)||，
再以输出索引方式（gather）对单声道信号做分数索引线性插值。
源信号越界读取视为 0（零填充）。
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from zerobas.core import DEFAULT_SPEED_OF_SOUND, FloatArray, SampleTrajectory, Waveform
from zerobas.errors import InvalidInputError
from zerobas.logging_config import get_logger

logger = get_logger(__name__)

# 允许的浮点误差：indices[t] <= t
_CAUSALITY_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Warpfield:
    """左右声道的分数源索引（采样单位，可为负）"""

    indices_l: FloatArray
    indices_r: FloatArray
    sample_rate: int

    def __post_init__(self) -> None:
        indices_l = np.array(self.indices_l, dtype=np.float64).reshape(-1)
        indices_r = np.array(self.indices_r, dtype=np.float64).reshape(-1)
        if indices_l.shape != indices_r.shape:
            raise InvalidInputError("warpfield channels must have equal length")
        if not (np.all(np.isfinite(indices_l)) and np.all(np.isfinite(indices_r))):
            raise InvalidInputError("warpfield contains non-finite indices")
        t = np.arange(indices_l.size, dtype=np.float64)
        if np.any(indices_l > t + _CAUSALITY_TOLERANCE) or np.any(indices_r > t + _CAUSALITY_TOLERANCE):
            raise InvalidInputError("warpfield must not read from the future (indices[t] <= t)")
        indices_l.setflags(write=False)
        indices_r.setflags(write=False)
        object.__setattr__(self, "indices_l", indices_l)
        object.__setattr__(self, "indices_r", indices_r)

    def __len__(self) -> int:
        return int(self.indices_l.size)

    def delays(self) -> tuple[FloatArray, FloatArray]:
        """每个采样点的延迟（采样数）"""
        t = np.arange(len(self), dtype=np.float64)
        return t - self.indices_l, t - self.indices_r


def compute_warpfield(traj: SampleTrajectory, nu_sound: float = DEFAULT_SPEED_OF_SOUND) -> Warpfield:
    """计算左右声道 warpfield

    Args:
        traj: 逐采样点轨迹
        nu_sound: 声速 (m/s)

    Returns:
        Warpfield
    """
    if not np.isfinite(nu_sound) or nu_sound <= 0:
        raise InvalidInputError(f"nu_sound must be positive, got {nu_sound}")
    for name in ("p_src", "p_ear_l", "p_ear_r"):
        if not np.all(np.isfinite(getattr(traj, name))):
            raise InvalidInputError(f"trajectory {name} contains non-finite positions")

    t = np.arange(traj.num_samples, dtype=np.float64)
    d_l, d_r = traj.distances()
    scale = traj.sample_rate / nu_sound
    logger.debug(
        "warpfield: S=%d, ν=%.3f, 左耳延迟 %.3f~%.3f, 右耳延迟 %.3f~%.3f 采样",
        traj.sample_rate,
        nu_sound,
        scale * d_l.min(),
        scale * d_l.max(),
        scale * d_r.min(),
        scale * d_r.max(),
    )
    return Warpfield(indices_l=t - scale * d_l, indices_r=t - scale * d_r, sample_rate=traj.sample_rate)


def warp_channel(samples: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """按分数索引线性插值读取单声道信号（越界为 0）"""
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    floor = np.floor(indices)
    frac = indices - floor
    i0 = floor.astype(np.int64)
    i1 = i0 + 1

    def _gather(idx: np.ndarray) -> np.ndarray:
        valid = (idx >= 0) & (idx < n)
        out = np.zeros(idx.shape, dtype=np.float64)
        out[valid] = x[idx[valid]]
        return out

    return (1.0 - frac) * _gather(i0) + frac * _gather(i1)


def apply_warp(mono: Waveform, field: Warpfield) -> tuple[Waveform, Waveform]:
    """将 warpfield 应用到单声道信号

    Returns:
        (left, right) 两个单声道 Waveform，保持输入精度
    """
    mono.require_mono("apply_warp input")
    if mono.num_samples != len(field):
        raise InvalidInputError(f"waveform has {mono.num_samples} samples, warpfield has {len(field)}")
    x = mono.channel(0)
    left = warp_channel(x, field.indices_l).astype(mono.dtype, copy=False)
    right = warp_channel(x, field.indices_r).astype(mono.dtype, copy=False)
    return Waveform.mono(left, mono.sample_rate), Waveform.mono(right, mono.sample_rate)


def geometric_time_warp(
    mono: Waveform, traj: SampleTrajectory, nu_sound: float = DEFAULT_SPEED_OF_SOUND
) -> Waveform:
    """GTW：compute_warpfield + apply_warp，返回双声道"""
    mono.require_mono("geometric_time_warp input")
    traj.require_length(mono.num_samples)
    if traj.sample_rate != mono.sample_rate:
        raise InvalidInputError(f"trajectory rate {traj.sample_rate} != waveform rate {mono.sample_rate}")
    field = compute_warpfield(traj, nu_sound)
    left, right = apply_warp(mono, field)
    return Waveform.from_pair(left, right)
