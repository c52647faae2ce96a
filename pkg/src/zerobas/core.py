"""核心领域类型

约定：
- 长度单位米，时间单位秒，采样率单位 Hz
- Waveform.samples 以声道优先（planar）方式存储，形状为 (channels, num_samples)；
  双声道时第 0 行为左声道，第 1 行为右声道
- 所有类型构造后不可变（数组设为只读），可在线程间共享
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from zerobas.errors import InvalidInputError

FloatArray = npt.NDArray[np.floating]

DEFAULT_SPEED_OF_SOUND = 343.0
DEFAULT_ITERATIONS = 3
DEFAULT_NOISE_LEVEL = 1


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _as_points(value: npt.ArrayLike, name: str) -> np.ndarray:
    points = np.array(value, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    if points.ndim != 2 or points.shape[1] != 3:
        raise InvalidInputError(f"{name} must be a sequence of 3-vectors, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise InvalidInputError(f"{name} contains non-finite coordinates")
    return points


@dataclass(frozen=True, eq=False)
class Waveform:
    """采样音频

    Attributes:
        samples: (channels, num_samples) 浮点数组，名义范围 [-1, 1]
        sample_rate: 采样率 (Hz)
    """

    samples: FloatArray
    sample_rate: int

    def __post_init__(self) -> None:
        samples = np.array(self.samples, copy=True)
        if not np.issubdtype(samples.dtype, np.floating):
            samples = samples.astype(np.float64)
        if samples.ndim == 1:
            samples = samples.reshape(1, -1)
        if samples.ndim != 2 or samples.shape[0] not in (1, 2):
            raise InvalidInputError(f"waveform must have 1 or 2 channels, got shape {samples.shape}")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise InvalidInputError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("waveform contains non-finite samples")
        object.__setattr__(self, "samples", _frozen(samples))
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @classmethod
    def mono(cls, samples: npt.ArrayLike, sample_rate: int) -> Waveform:
        data = np.asarray(samples)
        if data.ndim != 1:
            raise InvalidInputError(f"mono samples must be 1-D, got shape {data.shape}")
        return cls(data, sample_rate)

    @classmethod
    def stereo(cls, left: npt.ArrayLike, right: npt.ArrayLike, sample_rate: int) -> Waveform:
        left_arr, right_arr = np.asarray(left), np.asarray(right)
        if left_arr.shape != right_arr.shape or left_arr.ndim != 1:
            raise InvalidInputError(f"channel shapes differ: {left_arr.shape} vs {right_arr.shape}")
        return cls(np.stack([left_arr, right_arr]), sample_rate)

    @classmethod
    def from_pair(cls, left: Waveform, right: Waveform) -> Waveform:
        """由两个单声道 Waveform 组装双声道"""
        if left.sample_rate != right.sample_rate:
            raise InvalidInputError("sample rates differ between channels")
        return cls.stereo(left.channel(0), right.channel(0), left.sample_rate)

    @property
    def channels(self) -> int:
        return int(self.samples.shape[0])

    @property
    def num_samples(self) -> int:
        return int(self.samples.shape[1])

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    @property
    def dtype(self) -> np.dtype:
        return self.samples.dtype

    def channel(self, index: int) -> FloatArray:
        return self.samples[index]

    def channel_waveform(self, index: int) -> Waveform:
        return Waveform(self.samples[index : index + 1], self.sample_rate)

    def split(self) -> tuple[Waveform, Waveform]:
        """拆分为 (left, right) 两个单声道"""
        if self.channels != 2:
            raise InvalidInputError("split() requires a stereo waveform")
        return self.channel_waveform(0), self.channel_waveform(1)

    def require_mono(self, what: str = "input") -> None:
        if self.channels != 1:
            raise InvalidInputError(f"{what} must be mono, got {self.channels} channels")

    def require_stereo(self, what: str = "input") -> None:
        if self.channels != 2:
            raise InvalidInputError(f"{what} must be stereo, got {self.channels} channels")


class PoseFrame(NamedTuple):
    """一帧跟踪数据"""

    time_s: float
    p_src: tuple[float, float, float]
    p_ear_l: tuple[float, float, float]
    p_ear_r: tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class PoseTrack:
    """帧率下的声源与双耳位置

    Attributes:
        times: (F,) 严格递增的时间戳（秒）
        p_src / p_ear_l / p_ear_r: (F, 3) 位置（米）
    """

    times: FloatArray
    p_src: FloatArray
    p_ear_l: FloatArray
    p_ear_r: FloatArray

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=np.float64).reshape(-1)
        if times.size == 0:
            raise InvalidInputError("pose track must contain at least one frame")
        if not np.all(np.isfinite(times)):
            raise InvalidInputError("pose track contains non-finite timestamps")
        if np.any(np.diff(times) <= 0):
            raise InvalidInputError("pose track timestamps must be strictly increasing")
        src = _as_points(self.p_src, "p_src")
        ear_l = _as_points(self.p_ear_l, "p_ear_l")
        ear_r = _as_points(self.p_ear_r, "p_ear_r")
        for name, points in (("p_src", src), ("p_ear_l", ear_l), ("p_ear_r", ear_r)):
            if points.shape[0] != times.size:
                raise InvalidInputError(f"{name} has {points.shape[0]} frames, expected {times.size}")
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "p_src", _frozen(src))
        object.__setattr__(self, "p_ear_l", _frozen(ear_l))
        object.__setattr__(self, "p_ear_r", _frozen(ear_r))

    @classmethod
    def from_frames(cls, frames: list[PoseFrame] | list[tuple]) -> PoseTrack:
        if not frames:
            raise InvalidInputError("pose track must contain at least one frame")
        parsed = [PoseFrame(*frame) for frame in frames]
        return cls(
            times=np.array([f.time_s for f in parsed], dtype=np.float64),
            p_src=np.array([f.p_src for f in parsed], dtype=np.float64),
            p_ear_l=np.array([f.p_ear_l for f in parsed], dtype=np.float64),
            p_ear_r=np.array([f.p_ear_r for f in parsed], dtype=np.float64),
        )

    @classmethod
    def static(
        cls,
        p_src: npt.ArrayLike,
        p_ear_l: npt.ArrayLike,
        p_ear_r: npt.ArrayLike,
    ) -> PoseTrack:
        """单帧静态几何"""
        return cls(times=np.zeros(1), p_src=p_src, p_ear_l=p_ear_l, p_ear_r=p_ear_r)

    def __len__(self) -> int:
        return int(self.times.size)

    def frames(self) -> list[PoseFrame]:
        return [
            PoseFrame(float(t), tuple(s), tuple(lft), tuple(rgt))  # type: ignore[arg-type]
            for t, s, lft, rgt in zip(self.times, self.p_src, self.p_ear_l, self.p_ear_r, strict=True)
        ]


@dataclass(frozen=True, eq=False)
class SampleTrajectory:
    """逐采样点的位置（由 PoseTrack 插值得到）"""

    p_src: FloatArray
    p_ear_l: FloatArray
    p_ear_r: FloatArray
    sample_rate: int

    def __post_init__(self) -> None:
        src = _as_points(self.p_src, "p_src")
        ear_l = _as_points(self.p_ear_l, "p_ear_l")
        ear_r = _as_points(self.p_ear_r, "p_ear_r")
        if not (src.shape == ear_l.shape == ear_r.shape):
            raise InvalidInputError("trajectory arrays must have equal lengths")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise InvalidInputError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        object.__setattr__(self, "p_src", _frozen(src))
        object.__setattr__(self, "p_ear_l", _frozen(ear_l))
        object.__setattr__(self, "p_ear_r", _frozen(ear_r))
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def num_samples(self) -> int:
        return int(self.p_src.shape[0])

    def require_length(self, num_samples: int) -> None:
        if self.num_samples != num_samples:
            raise InvalidInputError(f"trajectory has {self.num_samples} samples, waveform has {num_samples}")

    def distances(self) -> tuple[FloatArray, FloatArray]:
        """每个采样点的 (D_l, D_r)，单位米"""
        return (
            np.linalg.norm(self.p_src - self.p_ear_l, axis=1),
            np.linalg.norm(self.p_src - self.p_ear_r, axis=1),
        )


@dataclass(frozen=True)
class PipelineConfig:
    """流水线配置

    Attributes:
        enable_gtw: 是否执行几何时间扭曲
        enable_as: 是否执行幅度缩放
        swap_order: 先对单声道精炼，再做 GTW/AS
        iterations: 声码器迭代次数 N
        noise_level: 噪声等级索引 k（原样透传给后端）
        speed_of_sound: 声速 (m/s)
        vocoder: 后端选择 identity | spectral_gate | external:<host>:<port>
        noise_init: 从高斯噪声而非 GTW+AS 信号开始精炼
        seed: noise_init 的随机种子
        sample_rate: 若设置，输入先重采样到该采样率
    """

    enable_gtw: bool = True
    enable_as: bool = True
    swap_order: bool = False
    iterations: int = DEFAULT_ITERATIONS
    noise_level: int = DEFAULT_NOISE_LEVEL
    speed_of_sound: float = DEFAULT_SPEED_OF_SOUND
    vocoder: str = "identity"
    noise_init: bool = False
    seed: int = 0
    sample_rate: int | None = None

    def __post_init__(self) -> None:
        if int(self.iterations) != self.iterations or self.iterations < 0:
            raise InvalidInputError(f"iterations must be a non-negative integer, got {self.iterations}")
        if int(self.noise_level) != self.noise_level or self.noise_level < 0:
            raise InvalidInputError(f"noise_level must be a non-negative integer, got {self.noise_level}")
        if not np.isfinite(self.speed_of_sound) or self.speed_of_sound <= 0:
            raise InvalidInputError(f"speed_of_sound must be positive, got {self.speed_of_sound}")
        if self.sample_rate is not None and self.sample_rate <= 0:
            raise InvalidInputError(f"sample_rate must be positive, got {self.sample_rate}")


def interpolate_track(track: PoseTrack, sample_rate: int, num_samples: int) -> SampleTrajectory:
    """将帧率跟踪数据线性插值到每个采样点

    采样点 n 的时间为 n / sample_rate；首帧之前与末帧之后钳位到首/末帧（不外推）。

    Args:
        track: 跟踪数据
        sample_rate: 目标采样率
        num_samples: 目标采样数

    Returns:
        SampleTrajectory
    """
    if track is None or len(track) == 0:
        raise InvalidInputError("pose track must contain at least one frame")
    if np.any(np.diff(track.times) <= 0):
        raise InvalidInputError("pose track timestamps must be strictly increasing")
    if num_samples <= 0:
        raise InvalidInputError(f"num_samples must be positive, got {num_samples}")
    if sample_rate <= 0:
        raise InvalidInputError(f"sample_rate must be positive, got {sample_rate}")

    t = np.arange(num_samples, dtype=np.float64) / sample_rate

    def _interp(points: np.ndarray) -> np.ndarray:
        # np.interp 在区间外返回端点值，正好是钳位语义
        return np.stack([np.interp(t, track.times, points[:, axis]) for axis in range(3)], axis=1)

    return SampleTrajectory(
        p_src=_interp(track.p_src),
        p_ear_l=_interp(track.p_ear_l),
        p_ear_r=_interp(track.p_ear_r),
        sample_rate=sample_rate,
    )
