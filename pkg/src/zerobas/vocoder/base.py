"""去噪声码器接口与迭代精炼

每个声道独立地以固定的 (c, k) 精炼 N 次；条件特征 c 在循环前由初始信号提取一次。
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from zerobas.core import FloatArray, Waveform
from zerobas.errors import InvalidInputError, RefinementError, VocoderError
from zerobas.features import MelConfig, StftConfig, log_mel
from zerobas.logging_config import get_logger

logger = get_logger(__name__)

CHANNEL_NAMES = ("left", "right")


class DenoisingVocoder(ABC):
    """去噪声码器后端

    refine(y, c, k) 必须返回与 y 等长、同采样率、全部有限的单声道波形，
    且对相同 (y, c, k) 结果确定。
    """

    name: str = "abstract"

    @abstractmethod
    def refine(self, y: Waveform, c: FloatArray, k: int) -> Waveform:
        """执行一次精炼"""

    def close(self) -> None:  # noqa: B027
        """释放后端资源（默认无操作）"""

    def __enter__(self) -> DenoisingVocoder:
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def identity_refine(y: Waveform, c: FloatArray, k: int) -> Waveform:
    """空后端：原样返回"""
    return y


class IdentityVocoder(DenoisingVocoder):
    name = "identity"

    def refine(self, y: Waveform, c: FloatArray, k: int) -> Waveform:
        return identity_refine(y, c, k)


def _check_output(y: Waveform, out: Waveform) -> None:
    if not isinstance(out, Waveform):
        raise VocoderError(f"backend returned {type(out).__name__}, expected Waveform")
    if out.channels != 1 or out.num_samples != y.num_samples:
        raise VocoderError(f"backend returned {out.channels}x{out.num_samples}, expected 1x{y.num_samples}")
    if out.sample_rate != y.sample_rate:
        raise VocoderError(f"backend changed sample rate {y.sample_rate} -> {out.sample_rate}")


def refine_channel(
    y: Waveform,
    c: FloatArray,
    vocoder: DenoisingVocoder,
    iterations: int,
    k: int,
    *,
    channel: str = "mono",
    start: Waveform | None = None,
) -> Waveform:
    """对单个声道执行 i = N..1 的迭代精炼

    Args:
        y: 声道信号 ŷ_N
        c: 该声道的 log-mel 条件特征（循环内不再更新）
        start: 若给出则以其作为 ŷ_N（噪声初始化），否则使用 y
    """
    current = start if start is not None else y
    for i in range(iterations, 0, -1):
        try:
            refined = vocoder.refine(current, c, k)
            _check_output(current, refined)
        except RefinementError:
            raise
        except VocoderError as e:
            raise RefinementError(str(e), iteration=i, channel=channel) from e
        except InvalidInputError as e:
            raise RefinementError(f"backend rejected input: {e}", iteration=i, channel=channel) from e
        logger.debug("声道 %s 迭代 i=%d 完成", channel, i)
        current = refined
    return current


def conditioning(w: Waveform, cfg: StftConfig, mel: MelConfig) -> FloatArray:
    """计算只读的 log-mel 条件特征"""
    c = log_mel(w, cfg, mel)
    c.setflags(write=False)
    return c


def noise_start(w: Waveform, seed: int, channel_index: int) -> Waveform:
    """以声道 RMS 缩放的高斯噪声作为起点（确定性）"""
    rng = np.random.default_rng([seed, channel_index])
    rms = float(np.sqrt(np.mean(np.square(w.channel(0), dtype=np.float64))))
    noise = rng.standard_normal(w.num_samples) * rms
    return Waveform.mono(noise.astype(w.dtype, copy=False), w.sample_rate)


def iterative_refine(
    pair: Waveform,
    vocoder: DenoisingVocoder,
    iterations: int,
    k: int,
    cfg: StftConfig | None = None,
    mel: MelConfig | None = None,
    *,
    parallel_channels: bool = False,
    noise_seed: int | None = None,
) -> Waveform:
    """迭代精炼双声道信号

    Args:
        pair: 双声道 x̂ = (x̂_l, x̂_r)
        vocoder: 去噪声码器
        iterations: 迭代次数 N（0 时原样返回）
        k: 噪声等级索引，透传给后端
        parallel_channels: 两个声道并发精炼
        noise_seed: 若给出，ŷ_N 由该种子的高斯噪声初始化

    Returns:
        精炼后的双声道 Waveform
    """
    pair.require_stereo("iterative_refine input")
    if iterations < 0:
        raise InvalidInputError(f"iterations must be non-negative, got {iterations}")
    if iterations == 0:
        return pair

    cfg = cfg or StftConfig()
    mel = mel or MelConfig()
    channels = pair.split()
    conds = [conditioning(ch, cfg, mel) for ch in channels]
    starts = [
        noise_start(ch, noise_seed, idx) if noise_seed is not None else None for idx, ch in enumerate(channels)
    ]
    logger.info("迭代精炼: backend=%s, N=%d, k=%d", vocoder.name, iterations, k)

    def _run(idx: int) -> Waveform:
        return refine_channel(
            channels[idx], conds[idx], vocoder, iterations, k, channel=CHANNEL_NAMES[idx], start=starts[idx]
        )

    if parallel_channels:
        with ThreadPoolExecutor(max_workers=2) as pool:
            left, right = pool.map(_run, range(2))
    else:
        left, right = _run(0), _run(1)
    return Waveform.from_pair(left, right)
