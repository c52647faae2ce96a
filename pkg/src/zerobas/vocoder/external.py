"""外部声码器客户端

每个连接同一时刻只有一个在途请求；并发精炼时每个线程持有独立连接。
"""

from __future__ import annotations

import socket
import threading
from dataclasses import dataclass

import numpy as np

from zerobas.core import FloatArray, Waveform
from zerobas.errors import (
    BackendReportedError,
    ExternalVocoderError,
    InvalidInputError,
    LengthMismatchError,
    MalformedResponseError,
    VocoderConnectionError,
    VocoderTimeoutError,
)
from zerobas.logging_config import get_logger
from zerobas.retry import RetryError, call_with_retry
from zerobas.vocoder import protocol
from zerobas.vocoder.base import DenoisingVocoder

logger = get_logger(__name__)

DEFAULT_TIMEOUT = 30.0
DEFAULT_MAX_PAYLOAD = 64 * 1024 * 1024


@dataclass(frozen=True)
class VocoderEndpoint:
    """外部后端地址

    Attributes:
        host / port: TCP 地址
        timeout: 单次收发超时（秒）
        max_payload: 单帧载荷上限（字节）
        connect_retries: 连接被拒绝时的重试次数
    """

    host: str
    port: int
    timeout: float = DEFAULT_TIMEOUT
    max_payload: int = DEFAULT_MAX_PAYLOAD
    connect_retries: int = 2

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise InvalidInputError(f"timeout must be positive, got {self.timeout}")
        if self.max_payload <= 0:
            raise InvalidInputError(f"max_payload must be positive, got {self.max_payload}")
        if not 0 < self.port < 65536:
            raise InvalidInputError(f"port out of range: {self.port}")
        if self.connect_retries < 0:
            raise InvalidInputError(f"connect_retries must be non-negative, got {self.connect_retries}")

    @classmethod
    def parse(cls, address: str, **kwargs) -> VocoderEndpoint:
        """解析 "host:port"（IPv6 使用 "[::1]:port"）"""
        host, sep, port = address.strip().rpartition(":")
        if not sep or not host or not port.isdigit():
            raise InvalidInputError(f"invalid vocoder endpoint {address!r}, expected host:port")
        return cls(host=host.strip("[]"), port=int(port), **kwargs)

    def __str__(self) -> str:
        return f"{self.host}:{self.port}"


def _is_refused(exc: Exception) -> bool:
    return isinstance(exc, ConnectionRefusedError)


class ExternalVocoderClient:
    """单连接客户端"""

    def __init__(self, endpoint: VocoderEndpoint):
        self.endpoint = endpoint
        self._sock: socket.socket | None = None

    def connect(self) -> None:
        if self._sock is not None:
            return
        try:
            self._sock = call_with_retry(
                socket.create_connection,
                (self.endpoint.host, self.endpoint.port),
                timeout=self.endpoint.timeout,
                max_retries=self.endpoint.connect_retries,
                initial_delay=0.5,
                should_retry=_is_refused,
            )
        except RetryError as e:
            raise VocoderConnectionError(f"connection to {self.endpoint} refused") from e
        except TimeoutError as e:
            raise VocoderTimeoutError(f"timed out connecting to {self.endpoint}") from e
        except OSError as e:
            raise VocoderConnectionError(f"cannot connect to {self.endpoint}: {e}") from e
        logger.debug("已连接外部声码器 %s", self.endpoint)

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None

    def __enter__(self) -> ExternalVocoderClient:
        self.connect()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def _read_exact(self, n: int) -> bytes:
        assert self._sock is not None
        chunks = bytearray()
        while len(chunks) < n:
            chunk = self._sock.recv(n - len(chunks))
            if not chunk:
                raise MalformedResponseError(f"connection closed mid-frame ({len(chunks)}/{n} bytes)")
            chunks.extend(chunk)
        return bytes(chunks)

    def request(self, samples: np.ndarray, sample_rate: int, k: int, mel: np.ndarray) -> np.ndarray:
        """发送一个请求并返回响应采样（float32）"""
        payload = protocol.encode_request(samples, sample_rate, k, mel)
        if len(payload) > self.endpoint.max_payload:
            raise InvalidInputError(f"request of {len(payload)} bytes exceeds max payload {self.endpoint.max_payload}")
        self.connect()
        assert self._sock is not None
        try:
            self._sock.sendall(payload)
            response = protocol.read_response(self._read_exact, max_payload=self.endpoint.max_payload)
        except TimeoutError as e:
            self.close()
            raise VocoderTimeoutError(f"no response from {self.endpoint} within {self.endpoint.timeout}s") from e
        except ExternalVocoderError:
            self.close()
            raise
        except OSError as e:
            self.close()
            raise VocoderConnectionError(f"connection to {self.endpoint} failed: {e}") from e

        if not response.ok:
            raise BackendReportedError(response.status, response.message)
        assert response.samples is not None
        if response.samples.size != np.asarray(samples).size:
            raise LengthMismatchError(
                f"backend returned {response.samples.size} samples, sent {np.asarray(samples).size}"
            )
        return response.samples


def external_refine(client: ExternalVocoderClient, y: Waveform, c: FloatArray, k: int) -> Waveform:
    """通过线协议精炼一次"""
    y.require_mono("external vocoder input")
    out = client.request(y.channel(0), y.sample_rate, k, c)
    if not np.all(np.isfinite(out)):
        raise MalformedResponseError("backend returned non-finite samples")
    return Waveform.mono(out.astype(y.dtype), y.sample_rate)


class ExternalVocoder(DenoisingVocoder):
    """外部后端；每个线程一条连接"""

    name = "external"

    def __init__(self, endpoint: VocoderEndpoint):
        self.endpoint = endpoint
        self._local = threading.local()
        self._clients: list[ExternalVocoderClient] = []
        self._lock = threading.Lock()

    def _client(self) -> ExternalVocoderClient:
        client = getattr(self._local, "client", None)
        if client is None:
            client = ExternalVocoderClient(self.endpoint)
            self._local.client = client
            with self._lock:
                self._clients.append(client)
        return client

    def refine(self, y: Waveform, c: FloatArray, k: int) -> Waveform:
        return external_refine(self._client(), y, c, k)

    def close(self) -> None:
        with self._lock:
            for client in self._clients:
                client.close()
            self._clients.clear()
        self._local = threading.local()
