"""外部声码器线协议（小端，分帧）

请求:
    "ZBV1" | sample_rate u32 | num_samples u32 | k u32 | mel_frames u32 | mel_bins u32
    | samples f32 × num_samples | mel f32 × (mel_frames · mel_bins)，按帧优先行主序
响应（成功）:
    "ZBR1" | status u32 = 0 | num_samples u32 | samples f32 × num_samples
响应（后端错误）:
    "ZBR1" | status u32 != 0 | message_len u32 | UTF-8 message（不携带采样）

log-mel 条件特征使用自然对数，参数见 zerobas.features。
"""

from __future__ import annotations

import struct
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from zerobas.errors import MalformedResponseError

REQUEST_MAGIC = b"ZBV1"
RESPONSE_MAGIC = b"ZBR1"
STATUS_OK = 0
STATUS_BACKEND_ERROR = 1
STATUS_BAD_REQUEST = 2

_REQUEST_HEADER = struct.Struct("<4sIIIII")
_RESPONSE_HEADER = struct.Struct("<4sI")
_U32 = struct.Struct("<I")
_F32 = np.dtype("<f4")

# 读取恰好 n 字节；对端提前关闭时抛出异常
ReadExact = Callable[[int], bytes]


class ProtocolError(MalformedResponseError):
    """帧格式不符合协议"""


@dataclass(frozen=True, eq=False)
class VocoderRequest:
    sample_rate: int
    k: int
    samples: npt.NDArray[np.float32]
    mel: npt.NDArray[np.float32]

    @property
    def num_samples(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True, eq=False)
class VocoderResponse:
    status: int
    samples: npt.NDArray[np.float32] | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def encode_request(samples: npt.ArrayLike, sample_rate: int, k: int, mel: npt.ArrayLike) -> bytes:
    """编码请求帧"""
    wave = np.asarray(samples, dtype=_F32).reshape(-1)
    mel_matrix = np.asarray(mel, dtype=_F32)
    if mel_matrix.ndim != 2:
        raise ValueError(f"mel must be a 2-D [frames x bins] matrix, got shape {mel_matrix.shape}")
    frames, bins = mel_matrix.shape
    header = _REQUEST_HEADER.pack(REQUEST_MAGIC, sample_rate, wave.size, k, frames, bins)
    return header + wave.tobytes() + np.ascontiguousarray(mel_matrix).tobytes()


def request_size(num_samples: int, mel_frames: int, mel_bins: int) -> int:
    return _REQUEST_HEADER.size + 4 * (num_samples + mel_frames * mel_bins)


def read_request(read_exact: ReadExact, max_payload: int | None = None) -> VocoderRequest:
    """从流中读取并解析一个请求帧"""
    magic, sample_rate, num_samples, k, frames, bins = _REQUEST_HEADER.unpack(read_exact(_REQUEST_HEADER.size))
    if magic != REQUEST_MAGIC:
        raise ProtocolError(f"bad request magic {magic!r}")
    payload = 4 * (num_samples + frames * bins)
    if max_payload is not None and payload > max_payload:
        raise ProtocolError(f"request payload {payload} bytes exceeds limit {max_payload}")
    samples = np.frombuffer(read_exact(4 * num_samples), dtype=_F32)
    mel = np.frombuffer(read_exact(4 * frames * bins), dtype=_F32).reshape(frames, bins)
    return VocoderRequest(sample_rate=sample_rate, k=k, samples=samples, mel=mel)


def decode_request(data: bytes) -> VocoderRequest:
    """解析完整的请求字节串（多余字节视为错误）"""
    reader = _BufferReader(data)
    request = read_request(reader.read_exact)
    if reader.remaining:
        raise ProtocolError(f"{reader.remaining} trailing bytes after request frame")
    return request


def encode_response(samples: npt.ArrayLike) -> bytes:
    wave = np.asarray(samples, dtype=_F32).reshape(-1)
    return _RESPONSE_HEADER.pack(RESPONSE_MAGIC, STATUS_OK) + _U32.pack(wave.size) + wave.tobytes()


def encode_error_response(status: int, message: str) -> bytes:
    if status == STATUS_OK:
        raise ValueError("error response requires a non-zero status")
    body = message.encode("utf-8")
    return _RESPONSE_HEADER.pack(RESPONSE_MAGIC, status) + _U32.pack(len(body)) + body


def read_response(read_exact: ReadExact, max_payload: int | None = None) -> VocoderResponse:
    """从流中读取并解析一个响应帧"""
    magic, status = _RESPONSE_HEADER.unpack(read_exact(_RESPONSE_HEADER.size))
    if magic != RESPONSE_MAGIC:
        raise ProtocolError(f"bad response magic {magic!r}")
    (length,) = _U32.unpack(read_exact(_U32.size))
    if status != STATUS_OK:
        if max_payload is not None and length > max_payload:
            raise ProtocolError(f"error message of {length} bytes exceeds limit {max_payload}")
        try:
            message = read_exact(length).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ProtocolError("error message is not valid UTF-8") from e
        return VocoderResponse(status=status, message=message)
    if max_payload is not None and 4 * length > max_payload:
        raise ProtocolError(f"response payload {4 * length} bytes exceeds limit {max_payload}")
    samples = np.frombuffer(read_exact(4 * length), dtype=_F32)
    return VocoderResponse(status=status, samples=samples)


def decode_response(data: bytes) -> VocoderResponse:
    reader = _BufferReader(data)
    response = read_response(reader.read_exact)
    if reader.remaining:
        raise ProtocolError(f"{reader.remaining} trailing bytes after response frame")
    return response


class _BufferReader:
    def __init__(self, data: bytes):
        self._data = memoryview(data)
        self._offset = 0

    @property
    def remaining(self) -> int:
        return len(self._data) - self._offset

    def read_exact(self, n: int) -> bytes:
        if n > self.remaining:
            raise ProtocolError(f"truncated frame: need {n} bytes, have {self.remaining}")
        chunk = self._data[self._offset : self._offset + n].tobytes()
        self._offset += n
        return chunk
