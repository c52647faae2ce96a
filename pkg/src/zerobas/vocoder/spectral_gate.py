"""谱门限去噪后端

不依赖神经网络的参考去噪器：STFT 后以每个频点跨帧幅度中位数乘以阈值系数作为噪声底，
按 Wiener 式软增益 ``1 - (floor / |Z|)^2`` 衰减接近噪声底的时频单元（增益下限为 attenuation），
再重叠相加重建。噪声底不超过全频带中位数，稳态强音调所在频点不会被当作噪声。
条件特征 c 不参与计算。
"""

from __future__ import annotations

import numpy as np
from scipy.signal import istft, stft

from zerobas.core import FloatArray, Waveform
from zerobas.errors import InvalidInputError
from zerobas.features import StftConfig
from zerobas.logging_config import get_logger
from zerobas.vocoder.base import DenoisingVocoder

logger = get_logger(__name__)

DEFAULT_ATTENUATION = 0.1
# 复高斯噪声的幅度中位数为 sqrt(P·ln2)，系数 1/sqrt(ln2) ≈ 1.2 时噪声底对应噪声功率 P
_BASE_RATIO = 1.2
_RATIO_STEP = 0.1
_MAX_RATIO = 2.0


def threshold_ratio(k: int) -> float:
    """噪声等级 k 对应的阈值系数（k 越大门限越激进，上限 2.0）"""
    if k < 0:
        raise InvalidInputError(f"noise level index must be non-negative, got {k}")
    return min(_BASE_RATIO + _RATIO_STEP * k, _MAX_RATIO)


def noise_floor(magnitude: FloatArray, k: int) -> FloatArray:
    """每个频点的噪声底估计，形状 (bins, 1)"""
    per_bin = np.median(magnitude, axis=1, keepdims=True)
    per_bin = np.minimum(per_bin, np.median(per_bin))
    return per_bin * threshold_ratio(k)


def gate_gain(magnitude: FloatArray, floor: FloatArray, attenuation: float) -> FloatArray:
    power = magnitude**2
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 1.0 - floor**2 / power
    gain = np.where(power > 0, gain, attenuation)
    return np.clip(gain, attenuation, 1.0)


def spectral_gate_refine(
    y: Waveform,
    c: FloatArray | None,
    k: int,
    *,
    cfg: StftConfig | None = None,
    attenuation: float = DEFAULT_ATTENUATION,
) -> Waveform:
    """对单声道做一次谱门限去噪

    Raises:
        InvalidInputError: 信号短于一帧
    """
    cfg = cfg or StftConfig()
    y.require_mono("spectral gate input")
    if y.num_samples < cfg.fft_size:
        raise InvalidInputError(f"spectral gate needs at least {cfg.fft_size} samples, got {y.num_samples}")

    x = y.channel(0).astype(np.float64)
    noverlap = cfg.fft_size - cfg.hop
    _, _, Z = stft(x, nperseg=cfg.fft_size, noverlap=noverlap, window="hann", boundary="even", padded=True)
    magnitude = np.abs(Z)
    gain = gate_gain(magnitude, noise_floor(magnitude, k), attenuation)
    logger.debug("谱门限: k=%d, 平均增益 %.3f", k, float(np.mean(gain)))

    _, out = istft(Z * gain, nperseg=cfg.fft_size, noverlap=noverlap, window="hann", boundary=True)
    out = out[: y.num_samples]
    if out.size < y.num_samples:
        out = np.pad(out, (0, y.num_samples - out.size))
    return Waveform.mono(out.astype(y.dtype, copy=False), y.sample_rate)


class SpectralGateVocoder(DenoisingVocoder):
    name = "spectral_gate"

    def __init__(self, cfg: StftConfig | None = None, attenuation: float = DEFAULT_ATTENUATION):
        if not 0 <= attenuation <= 1:
            raise InvalidInputError(f"attenuation must lie in [0, 1], got {attenuation}")
        self.cfg = cfg or StftConfig()
        self.attenuation = attenuation

    def refine(self, y: Waveform, c: FloatArray, k: int) -> Waveform:
        return spectral_gate_refine(y, c, k, cfg=self.cfg, attenuation=self.attenuation)
