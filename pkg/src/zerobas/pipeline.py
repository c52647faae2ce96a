"""单声道到双耳的完整流水线

默认顺序：GTW -> AS -> 迭代精炼。swap_order 时先对单声道精炼，再做 GTW/AS。
"""

from __future__ import annotations

from zerobas.ampscale import amplitude_scaling
from zerobas.core import PipelineConfig, PoseTrack, SampleTrajectory, Waveform, interpolate_track
from zerobas.dataio.audio import resample_audio
from zerobas.errors import InvalidInputError
from zerobas.features import MelConfig, StftConfig
from zerobas.geowarp import geometric_time_warp
from zerobas.logging_config import get_logger
from zerobas.vocoder import DenoisingVocoder, build_vocoder, iterative_refine
from zerobas.vocoder.base import conditioning, noise_start, refine_channel

logger = get_logger(__name__)


def spatialize(mono: Waveform, traj: SampleTrajectory, config: PipelineConfig) -> Waveform:
    """GTW 与 AS 两个无参数阶段；两者都关闭时复制单声道"""
    mono.require_mono("spatialize input")
    if config.enable_gtw:
        pair = geometric_time_warp(mono, traj, config.speed_of_sound)
    else:
        pair = Waveform.stereo(mono.channel(0), mono.channel(0), mono.sample_rate)
    if config.enable_as:
        pair = amplitude_scaling(pair, traj)
    return pair


def _refine_mono(
    mono: Waveform,
    vocoder: DenoisingVocoder,
    config: PipelineConfig,
    stft_cfg: StftConfig,
    mel_cfg: MelConfig,
) -> Waveform:
    if config.iterations == 0:
        return mono
    c = conditioning(mono, stft_cfg, mel_cfg)
    start = noise_start(mono, config.seed, 0) if config.noise_init else None
    return refine_channel(
        mono, c, vocoder, config.iterations, config.noise_level, channel="mono", start=start
    )


def binauralize(
    mono: Waveform,
    track: PoseTrack,
    config: PipelineConfig | None = None,
    vocoder: DenoisingVocoder | None = None,
    stft_cfg: StftConfig | None = None,
    mel_cfg: MelConfig | None = None,
) -> Waveform:
    """将单声道语音渲染为双耳信号

    Args:
        mono: 单声道输入
        track: 声源与双耳的跟踪数据
        config: 流水线配置，默认为最佳配置（GTW+AS，N=3）
        vocoder: 去噪后端；为 None 时按 config.vocoder 构造，并在结束后关闭
        stft_cfg / mel_cfg: 条件特征参数

    Returns:
        双声道 Waveform（左、右）
    """
    config = config or PipelineConfig()
    stft_cfg = stft_cfg or StftConfig()
    mel_cfg = mel_cfg or MelConfig()
    if mono.channels != 1:
        raise InvalidInputError(f"binauralize expects a mono input, got {mono.channels} channels")

    if config.sample_rate is not None and config.sample_rate != mono.sample_rate:
        logger.info("重采样输入: %d Hz -> %d Hz", mono.sample_rate, config.sample_rate)
        mono = resample_audio(mono, config.sample_rate)

    owned = vocoder is None
    backend = vocoder if vocoder is not None else build_vocoder(config.vocoder, stft_cfg=stft_cfg)
    try:
        traj = interpolate_track(track, mono.sample_rate, mono.num_samples)
        logger.debug(
            "流水线: gtw=%s, as=%s, swap=%s, N=%d, k=%d, backend=%s",
            config.enable_gtw,
            config.enable_as,
            config.swap_order,
            config.iterations,
            config.noise_level,
            backend.name,
        )
        if config.swap_order:
            refined = _refine_mono(mono, backend, config, stft_cfg, mel_cfg)
            return spatialize(refined, traj, config)

        pair = spatialize(mono, traj, config)
        return iterative_refine(
            pair,
            backend,
            config.iterations,
            config.noise_level,
            stft_cfg,
            mel_cfg,
            noise_seed=config.seed if config.noise_init else None,
        )
    finally:
        if owned:
            backend.close()
