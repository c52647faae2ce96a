"""客观评估指标

- wave_l2: 逐声道波形 MSE × 10³
- amplitude_l2: 幅度谱 MSE
- phase_l2: 左右相位差的 MSE（差值先折叠到 (-π, π]）
- mrstft: 多分辨率 STFT 损失（谱收敛 + 对数幅度 L1，分辨率 512/1024/2048）

所有指标对两个声道取平均，报告中另附逐声道结果。
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import numpy.typing as npt
from scipy.signal import correlate, correlation_lags

from zerobas.core import FloatArray, Waveform
from zerobas.errors import InvalidInputError
from zerobas.features import StftConfig, stft_array
from zerobas.logging_config import get_logger
from zerobas.vocoder.base import CHANNEL_NAMES

logger = get_logger(__name__)

WAVE_SCALE = 1e3
SILENT_BIN = 1e-8
MRSTFT_RESOLUTIONS = (512, 1024, 2048)
MRSTFT_EPS = 1e-7
REPORT_SCHEMA = "zerobas.metrics/1"
METRIC_NAMES = ("wave_l2", "amplitude_l2", "phase_l2", "mrstft")

ComplexArray = npt.NDArray[np.complexfloating]


def _check_pair(gt: Waveform, syn: Waveform) -> None:
    gt.require_stereo("reference")
    syn.require_stereo("hypothesis")
    if gt.sample_rate != syn.sample_rate:
        raise InvalidInputError(f"sample rates differ: {gt.sample_rate} vs {syn.sample_rate}")
    if gt.num_samples != syn.num_samples:
        raise InvalidInputError(f"lengths differ: {gt.num_samples} vs {syn.num_samples}")


def wrap_phase(x: npt.ArrayLike) -> FloatArray:
    """折叠到 (-π, π]"""
    x = np.asarray(x, dtype=np.float64)
    return x - 2 * np.pi * np.ceil((x - np.pi) / (2 * np.pi))


def _spectra(w: Waveform, cfg: StftConfig) -> list[ComplexArray]:
    return [stft_array(w.channel(i), cfg) for i in range(w.channels)]


def _wave_l2_channels(gt: Waveform, syn: Waveform) -> FloatArray:
    diff = gt.samples.astype(np.float64) - syn.samples.astype(np.float64)
    return np.mean(np.square(diff), axis=1) * WAVE_SCALE


def wave_l2(gt: Waveform, syn: Waveform) -> float:
    """波形 MSE × 10³（两个声道、全部采样取平均）"""
    _check_pair(gt, syn)
    return float(np.mean(_wave_l2_channels(gt, syn)))


def _amplitude_l2_channels(gt_spec: list[ComplexArray], syn_spec: list[ComplexArray]) -> FloatArray:
    return np.array([np.mean(np.square(np.abs(g) - np.abs(s))) for g, s in zip(gt_spec, syn_spec, strict=True)])


def amplitude_l2(gt: Waveform, syn: Waveform, cfg: StftConfig | None = None) -> float:
    """幅度谱 MSE（声道、帧、频点取平均）"""
    _check_pair(gt, syn)
    cfg = cfg or StftConfig()
    return float(np.mean(_amplitude_l2_channels(_spectra(gt, cfg), _spectra(syn, cfg))))


def phase_l2_from_stft(gt_l: ComplexArray, gt_r: ComplexArray, syn_l: ComplexArray, syn_r: ComplexArray) -> float:
    """由四个复数谱计算相位差 MSE

    两个信号中左右声道幅度都低于 1e-8 的时频单元不参与平均；全部被排除时返回 0。
    """
    delta_gt = wrap_phase(np.angle(gt_l) - np.angle(gt_r))
    delta_syn = wrap_phase(np.angle(syn_l) - np.angle(syn_r))
    silent = (
        (np.abs(gt_l) < SILENT_BIN)
        & (np.abs(gt_r) < SILENT_BIN)
        & (np.abs(syn_l) < SILENT_BIN)
        & (np.abs(syn_r) < SILENT_BIN)
    )
    if np.all(silent):
        return 0.0
    err = np.square(wrap_phase(delta_gt - delta_syn))
    return float(np.mean(err[~silent]))


def phase_l2(gt: Waveform, syn: Waveform, cfg: StftConfig | None = None) -> float:
    """左右相位差 MSE，取值不超过 π²"""
    _check_pair(gt, syn)
    cfg = cfg or StftConfig()
    gt_l, gt_r = _spectra(gt, cfg)
    syn_l, syn_r = _spectra(syn, cfg)
    return phase_l2_from_stft(gt_l, gt_r, syn_l, syn_r)


def spectral_convergence(gt_mag: FloatArray, syn_mag: FloatArray) -> float:
    """||X - Y||_F / ||X||_F（X 为参考幅度谱）"""
    num = float(np.linalg.norm(gt_mag - syn_mag))
    den = float(np.linalg.norm(gt_mag))
    return num / max(den, MRSTFT_EPS)


def log_magnitude_l1(gt_mag: FloatArray, syn_mag: FloatArray) -> float:
    return float(np.mean(np.abs(np.log(np.maximum(gt_mag, MRSTFT_EPS)) - np.log(np.maximum(syn_mag, MRSTFT_EPS)))))


def _mrstft_channels(gt: Waveform, syn: Waveform, resolutions: tuple[int, ...]) -> FloatArray:
    per_channel = np.zeros(gt.channels)
    for fft_size in resolutions:
        cfg = StftConfig(fft_size=fft_size, hop=fft_size // 4)
        for i in range(gt.channels):
            gt_mag = np.abs(stft_array(gt.channel(i), cfg))
            syn_mag = np.abs(stft_array(syn.channel(i), cfg))
            per_channel[i] += spectral_convergence(gt_mag, syn_mag) + log_magnitude_l1(gt_mag, syn_mag)
    return per_channel / len(resolutions)


def mrstft(gt: Waveform, syn: Waveform, resolutions: tuple[int, ...] = MRSTFT_RESOLUTIONS) -> float:
    """多分辨率 STFT 损失（分辨率与声道取平均）"""
    _check_pair(gt, syn)
    return float(np.mean(_mrstft_channels(gt, syn, resolutions)))


def align_pair(gt: Waveform, syn: Waveform, max_lag: int | None = None) -> tuple[Waveform, Waveform, int]:
    """以左声道互相关对齐两段双声道信号，并裁剪到重叠部分

    Returns:
        (gt_aligned, syn_aligned, lag)；lag < 0 表示 syn 落后于 gt
    """
    gt.require_stereo("reference")
    syn.require_stereo("hypothesis")
    if gt.sample_rate != syn.sample_rate:
        raise InvalidInputError(f"sample rates differ: {gt.sample_rate} vs {syn.sample_rate}")
    x = gt.channel(0).astype(np.float64)
    y = syn.channel(0).astype(np.float64)
    corr = correlate(x, y, mode="full")
    lags = correlation_lags(x.size, y.size, mode="full")
    if max_lag is not None:
        keep = np.abs(lags) <= max_lag
        corr, lags = corr[keep], lags[keep]
    lag = int(lags[np.argmax(corr)])

    if lag >= 0:
        gt_part, syn_part = gt.samples[:, lag:], syn.samples
    else:
        gt_part, syn_part = gt.samples, syn.samples[:, -lag:]
    length = min(gt_part.shape[1], syn_part.shape[1])
    if length <= 0:
        raise InvalidInputError(f"signals do not overlap after alignment (lag={lag})")
    logger.debug("对齐: lag=%d, 重叠 %d 采样", lag, length)
    return (
        Waveform(gt_part[:, :length], gt.sample_rate),
        Waveform(syn_part[:, :length], syn.sample_rate),
        lag,
    )


@dataclass(frozen=True)
class MetricReport:
    """单条语音的指标

    Attributes:
        name: 语音标识（通常为文件名）
        per_channel: {"left": {...}, "right": {...}}，phase_l2 为声道间指标不在其中
        lag: 启用对齐时检测到的延迟（采样）
    """

    wave_l2: float
    amplitude_l2: float
    phase_l2: float
    mrstft: float
    name: str = ""
    per_channel: dict[str, dict[str, float]] = field(default_factory=dict)
    lag: int | None = None

    def __post_init__(self) -> None:
        for metric in METRIC_NAMES:
            value = getattr(self, metric)
            if not np.isfinite(value) or value < 0:
                raise InvalidInputError(f"{metric} must be finite and non-negative, got {value}")

    def values(self) -> dict[str, float]:
        return {metric: float(getattr(self, metric)) for metric in METRIC_NAMES}

    def to_text(self) -> str:
        parts = [f"utterance={self.name}"] + [f"{k}={v:.6f}" for k, v in self.values().items()]
        if self.lag is not None:
            parts.append(f"lag={self.lag}")
        return " ".join(parts)


def evaluate_pair(
    gt: Waveform,
    syn: Waveform,
    cfg: StftConfig | None = None,
    *,
    align: bool = False,
    name: str = "",
) -> MetricReport:
    """计算四项指标"""
    cfg = cfg or StftConfig()
    lag = None
    if align:
        gt, syn, lag = align_pair(gt, syn)
    _check_pair(gt, syn)

    gt_spec, syn_spec = _spectra(gt, cfg), _spectra(syn, cfg)
    wave = _wave_l2_channels(gt, syn)
    amp = _amplitude_l2_channels(gt_spec, syn_spec)
    mr = _mrstft_channels(gt, syn, MRSTFT_RESOLUTIONS)
    per_channel = {
        CHANNEL_NAMES[i]: {"wave_l2": float(wave[i]), "amplitude_l2": float(amp[i]), "mrstft": float(mr[i])}
        for i in range(2)
    }
    return MetricReport(
        wave_l2=float(np.mean(wave)),
        amplitude_l2=float(np.mean(amp)),
        phase_l2=phase_l2_from_stft(gt_spec[0], gt_spec[1], syn_spec[0], syn_spec[1]),
        mrstft=float(np.mean(mr)),
        name=name,
        per_channel=per_channel,
        lag=lag,
    )


@dataclass(frozen=True)
class CorpusReport:
    """语料级报告：逐条结果与均值"""

    utterances: tuple[MetricReport, ...]

    def __len__(self) -> int:
        return len(self.utterances)

    def means(self) -> dict[str, float]:
        if not self.utterances:
            return dict.fromkeys(METRIC_NAMES, 0.0)
        return {
            metric: float(np.mean([getattr(report, metric) for report in self.utterances])) for metric in METRIC_NAMES
        }

    def to_text(self) -> str:
        """每行一条 key=value 记录，最后一行为语料均值"""
        lines = [report.to_text() for report in self.utterances]
        summary = " ".join(f"{k}={v:.6f}" for k, v in self.means().items())
        lines.append(f"corpus n={len(self)} {summary}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "utterances": [asdict(report) for report in self.utterances],
            "corpus": {"n": len(self), **self.means()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)
