"""WAV 读写与重采样

支持 16/24 bit 整数 PCM 与 32 bit float。整数采样归一化到 [-1, 1)（-32768 -> -1.0），
以 float64 读出；float 文件以 float32 读出，写回后逐位一致。
"""

from __future__ import annotations

import struct
from math import gcd
from pathlib import Path

import numpy as np
import soundfile as sf
from scipy.signal import resample_poly

from zerobas.core import Waveform
from zerobas.errors import (
    AudioFormatError,
    HeaderMismatchError,
    InvalidInputError,
    TruncatedFileError,
    UnsupportedCodecError,
)
from zerobas.logging_config import get_logger

logger = get_logger(__name__)

SUBTYPES = {16: "PCM_16", 24: "PCM_24", 32: "FLOAT"}
_READ_DTYPES = {"PCM_16": "float64", "PCM_24": "float64", "FLOAT": "float32"}
_MIN_WAV_SIZE = 44


def _check_header(path: Path) -> None:
    """校验 RIFF/WAVE 魔数，并确认 data 块声明的字节数都在文件里"""
    size = path.stat().st_size
    if size < _MIN_WAV_SIZE:
        raise TruncatedFileError(f"{path}: {size} bytes is shorter than a WAV header")
    with path.open("rb") as f:
        head = f.read(12)
        if head[:4] != b"RIFF" or head[8:12] != b"WAVE":
            raise HeaderMismatchError(f"{path}: not a RIFF/WAVE file (magic {head[:4]!r}/{head[8:12]!r})")
        offset = 12
        while True:
            chunk = f.read(8)
            if len(chunk) < 8:
                raise TruncatedFileError(f"{path}: no data chunk before end of file")
            chunk_id, chunk_size = struct.unpack("<4sI", chunk)
            offset += 8
            if chunk_id == b"data":
                if offset + chunk_size > size:
                    raise TruncatedFileError(
                        f"{path}: data chunk declares {chunk_size} bytes but only {size - offset} are present"
                    )
                return
            # 块按偶数字节对齐
            offset += chunk_size + (chunk_size & 1)
            f.seek(offset)


def read_wav(path: str | Path) -> Waveform:
    """读取 WAV 文件

    Raises:
        FileNotFoundError: 文件不存在
        TruncatedFileError / HeaderMismatchError / UnsupportedCodecError: 解析失败
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"audio file not found: {path}")
    _check_header(path)
    try:
        info = sf.info(str(path))
        if info.subtype not in _READ_DTYPES:
            raise UnsupportedCodecError(f"{path}: unsupported subtype {info.subtype}, expected PCM_16/PCM_24/FLOAT")
        data, sample_rate = sf.read(str(path), dtype=_READ_DTYPES[info.subtype], always_2d=True)
    except sf.LibsndfileError as e:
        raise AudioFormatError(f"{path}: {e}") from e
    if data.shape[0] == 0:
        raise TruncatedFileError(f"{path}: no sample frames")
    logger.debug("读取 %s: %d 声道, %d 采样, %d Hz, %s", path, data.shape[1], data.shape[0], sample_rate, info.subtype)
    return Waveform(data.T, sample_rate)


def write_wav(path: str | Path, w: Waveform, bit_depth: int = 32) -> Path:
    """写出 WAV 文件（必要时创建父目录）

    Args:
        bit_depth: 16 / 24 为整数 PCM，32 为 float
    """
    if bit_depth not in SUBTYPES:
        raise InvalidInputError(f"bit_depth must be one of {sorted(SUBTYPES)}, got {bit_depth}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = w.samples.T
    if bit_depth == 32:
        data = data.astype(np.float32, copy=False)
    sf.write(str(path), data, w.sample_rate, subtype=SUBTYPES[bit_depth], format="WAV")
    logger.debug("写出 %s: %d 声道, %d 采样, %s", path, w.channels, w.num_samples, SUBTYPES[bit_depth])
    return path


def resample_audio(w: Waveform, target_rate: int) -> Waveform:
    """多相窗函数 sinc 重采样，输出长度 round(len * target / source)"""
    if int(target_rate) != target_rate or target_rate <= 0:
        raise InvalidInputError(f"target_rate must be a positive integer, got {target_rate}")
    target_rate = int(target_rate)
    if target_rate == w.sample_rate:
        return w
    divisor = gcd(target_rate, w.sample_rate)
    up, down = target_rate // divisor, w.sample_rate // divisor
    out = resample_poly(w.samples.astype(np.float64), up, down, axis=-1)
    length = round(w.num_samples * target_rate / w.sample_rate)
    if out.shape[1] >= length:
        out = out[:, :length]
    else:
        out = np.pad(out, ((0, 0), (0, length - out.shape[1])))
    logger.debug("重采样 %d -> %d Hz (up=%d, down=%d)", w.sample_rate, target_rate, up, down)
    return Waveform(out.astype(w.dtype, copy=False), target_rate)
