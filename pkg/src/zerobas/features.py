"""STFT 与 log-mel 特征

约定（外部声码器必须与之一致）：
- 周期 Hann 窗，默认 fft_size=1024、hop=256，reflect 居中填充
- 帧数 = ceil(len / hop)（center=True 时）
- log-mel 使用自然对数：log(melFB · |STFT| + floor)，滤波器组每行归一化为单位面积（行和为 1）
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import librosa
import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import get_window

from zerobas.core import FloatArray, Waveform
from zerobas.errors import InvalidInputError


@dataclass(frozen=True)
class StftConfig:
    """STFT 分析参数

    Attributes:
        fft_size: 帧长（2 的幂）
        hop: 帧移，0 < hop <= fft_size
        center: True 时两端 reflect 填充 fft_size // 2
    """

    fft_size: int = 1024
    hop: int = 256
    center: bool = True

    def __post_init__(self) -> None:
        if self.fft_size <= 0 or self.fft_size & (self.fft_size - 1):
            raise InvalidInputError(f"fft_size must be a power of two, got {self.fft_size}")
        if not 0 < self.hop <= self.fft_size:
            raise InvalidInputError(f"hop must satisfy 0 < hop <= fft_size, got {self.hop}")

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1

    def num_frames(self, num_samples: int) -> int:
        if self.center:
            return math.ceil(num_samples / self.hop)
        return 1 + (num_samples - self.fft_size) // self.hop

    def window(self) -> FloatArray:
        return get_window("hann", self.fft_size, fftbins=True)


@dataclass(frozen=True)
class MelConfig:
    """mel 滤波器组参数；f_max 为 None 时取 sample_rate / 2"""

    mel_bins: int = 128
    f_min: float = 20.0
    f_max: float | None = None
    floor: float = 1e-5

    def __post_init__(self) -> None:
        if self.mel_bins <= 0:
            raise InvalidInputError(f"mel_bins must be positive, got {self.mel_bins}")
        if self.floor <= 0:
            raise InvalidInputError(f"floor must be positive, got {self.floor}")
        if self.f_min < 0:
            raise InvalidInputError(f"f_min must be non-negative, got {self.f_min}")

    def resolve_f_max(self, sample_rate: int) -> float:
        f_max = sample_rate / 2 if self.f_max is None else float(self.f_max)
        if not self.f_min < f_max <= sample_rate / 2:
            raise InvalidInputError(
                f"mel range must satisfy 0 <= f_min < f_max <= {sample_rate / 2}, got ({self.f_min}, {f_max})"
            )
        return f_max


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """复数 STFT，形状 (frames, bins)"""

    values: npt.NDArray[np.complexfloating]
    config: StftConfig
    sample_rate: int

    @property
    def magnitude(self) -> FloatArray:
        return np.abs(self.values)

    @property
    def phase(self) -> FloatArray:
        return np.angle(self.values)

    @property
    def num_frames(self) -> int:
        return int(self.values.shape[0])


def frame_signal(samples: npt.ArrayLike, cfg: StftConfig) -> FloatArray:
    """按配置分帧（未加窗），形状 (frames, fft_size)"""
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    num_samples = x.size
    if num_samples < 1:
        raise InvalidInputError("signal must contain at least one sample")
    if cfg.center:
        pad = cfg.fft_size // 2
        x = np.pad(x, (pad, pad), mode="reflect")
    elif num_samples < cfg.fft_size:
        raise InvalidInputError(f"uncentered STFT needs at least {cfg.fft_size} samples, got {num_samples}")
    frames = sliding_window_view(x, cfg.fft_size)[:: cfg.hop]
    return frames[: cfg.num_frames(num_samples)]


def stft_array(samples: npt.ArrayLike, cfg: StftConfig) -> npt.NDArray[np.complexfloating]:
    """对一维数组做 STFT，返回 (frames, bins) 复数矩阵"""
    frames = frame_signal(samples, cfg)
    return np.fft.rfft(frames * cfg.window(), axis=-1)


def stft(w: Waveform, cfg: StftConfig | None = None) -> Spectrogram:
    """单声道 STFT"""
    cfg = cfg or StftConfig()
    w.require_mono("stft input")
    return Spectrogram(values=stft_array(w.channel(0), cfg), config=cfg, sample_rate=w.sample_rate)


def mel_filterbank(sample_rate: int, cfg: StftConfig, mel: MelConfig) -> FloatArray:
    """三角 mel 滤波器组，形状 (mel_bins, bins)，每行和为 1（空行保持为 0）"""
    f_max = mel.resolve_f_max(sample_rate)
    return librosa.filters.mel(
        sr=sample_rate,
        n_fft=cfg.fft_size,
        n_mels=mel.mel_bins,
        fmin=mel.f_min,
        fmax=f_max,
        norm=1,
        dtype=np.float64,
    )


def log_mel(w: Waveform, cfg: StftConfig | None = None, mel: MelConfig | None = None) -> FloatArray:
    """log-mel 谱，形状 (frames, mel_bins)"""
    cfg = cfg or StftConfig()
    mel = mel or MelConfig()
    magnitude = stft(w, cfg).magnitude
    fb = mel_filterbank(w.sample_rate, cfg, mel)
    return np.log(magnitude @ fb.T + mel.floor)
