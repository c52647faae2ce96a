"""去噪声码器后端与迭代精炼"""

from zerobas.errors import InvalidInputError
from zerobas.features import StftConfig
from zerobas.vocoder.base import (
    DenoisingVocoder,
    IdentityVocoder,
    identity_refine,
    iterative_refine,
    refine_channel,
)
from zerobas.vocoder.external import ExternalVocoder, VocoderEndpoint, external_refine
from zerobas.vocoder.spectral_gate import SpectralGateVocoder, spectral_gate_refine

BUILTIN_BACKENDS = ("identity", "spectral_gate")


def build_vocoder(selector: str, *, stft_cfg: StftConfig | None = None, **endpoint_options) -> DenoisingVocoder:
    """按名称构造后端

    Args:
        selector: identity | spectral_gate（或 spectral-gate） | external:<host>:<port>
        stft_cfg: 谱门限后端使用的 STFT 参数
        endpoint_options: 透传给 VocoderEndpoint（timeout / max_payload / connect_retries）

    Returns:
        DenoisingVocoder 实例
    """
    name = selector.strip()
    if name.startswith("external:"):
        return ExternalVocoder(VocoderEndpoint.parse(name[len("external:") :], **endpoint_options))
    normalized = name.lower().replace("-", "_")
    if normalized == "identity":
        return IdentityVocoder()
    if normalized == "spectral_gate":
        return SpectralGateVocoder(stft_cfg)
    raise InvalidInputError(
        f"unknown vocoder {selector!r}, expected one of: identity, spectral-gate, external:<host>:<port>"
    )


__all__ = [
    "BUILTIN_BACKENDS",
    "DenoisingVocoder",
    "ExternalVocoder",
    "IdentityVocoder",
    "SpectralGateVocoder",
    "VocoderEndpoint",
    "build_vocoder",
    "external_refine",
    "identity_refine",
    "iterative_refine",
    "refine_channel",
    "spectral_gate_refine",
]
