"""参考声码器服务端

以线协议提供内置后端（identity / spectral_gate），用于联调外部声码器路径。
每个连接可顺序发送多个请求，同一连接上一次只处理一个。
"""

from __future__ import annotations

import socketserver
import threading

import numpy as np

from zerobas.core import Waveform
from zerobas.errors import InvalidInputError, VocoderError
from zerobas.logging_config import get_logger
from zerobas.vocoder import protocol
from zerobas.vocoder.base import DenoisingVocoder

logger = get_logger(__name__)


class _ConnectionClosed(Exception):
    """对端在帧边界处关闭连接"""


class VocoderRequestHandler(socketserver.BaseRequestHandler):
    server: VocoderServer

    def _read_exact(self, n: int) -> bytes:
        chunks = bytearray()
        while len(chunks) < n:
            chunk = self.request.recv(n - len(chunks))
            if not chunk:
                if not chunks:
                    raise _ConnectionClosed
                raise protocol.ProtocolError(f"client closed mid-frame ({len(chunks)}/{n} bytes)")
            chunks.extend(chunk)
        return bytes(chunks)

    def handle(self) -> None:
        peer = "%s:%s" % self.client_address[:2]
        logger.debug("新连接 %s", peer)
        served = 0
        while True:
            try:
                request = protocol.read_request(self._read_exact, max_payload=self.server.max_payload)
            except _ConnectionClosed:
                break
            except protocol.ProtocolError as e:
                logger.warning("来自 %s 的请求格式错误: %s", peer, e)
                self.request.sendall(protocol.encode_error_response(protocol.STATUS_BAD_REQUEST, str(e)))
                break
            except OSError as e:
                logger.warning("连接 %s 中断: %s", peer, e)
                break

            self.request.sendall(self.server.process(request))
            served += 1
        logger.debug("连接 %s 关闭，共处理 %d 个请求", peer, served)


class VocoderServer(socketserver.ThreadingTCPServer):
    """多线程 TCP 服务端，每个连接一个线程"""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(
        self,
        address: tuple[str, int],
        vocoder: DenoisingVocoder,
        max_payload: int = 64 * 1024 * 1024,
    ):
        self.vocoder = vocoder
        self.max_payload = max_payload
        super().__init__(address, VocoderRequestHandler)

    @property
    def port(self) -> int:
        return int(self.server_address[1])

    def process(self, request: protocol.VocoderRequest) -> bytes:
        """处理单个请求，返回编码后的响应帧"""
        try:
            y = Waveform.mono(request.samples.astype(np.float32), request.sample_rate)
            out = self.vocoder.refine(y, request.mel, request.k)
        except InvalidInputError as e:
            return protocol.encode_error_response(protocol.STATUS_BAD_REQUEST, str(e))
        except VocoderError as e:
            logger.error("后端 %s 处理失败: %s", self.vocoder.name, e)
            return protocol.encode_error_response(protocol.STATUS_BACKEND_ERROR, str(e))
        except Exception as e:
            # 后端的任意异常都回错误帧，连接保持可用
            logger.exception("后端 %s 异常", self.vocoder.name)
            return protocol.encode_error_response(protocol.STATUS_BACKEND_ERROR, f"{type(e).__name__}: {e}")
        return protocol.encode_response(out.channel(0))

    def start_background(self) -> threading.Thread:
        """在后台线程中运行 serve_forever（测试与嵌入使用）"""
        thread = threading.Thread(target=self.serve_forever, name="zerobas-vocoder-server", daemon=True)
        thread.start()
        return thread

    def server_close(self) -> None:
        super().server_close()
        self.vocoder.close()


def serve(host: str, port: int, vocoder: DenoisingVocoder, max_payload: int = 64 * 1024 * 1024) -> None:
    """阻塞运行服务端直到 KeyboardInterrupt"""
    with VocoderServer((host, port), vocoder, max_payload=max_payload) as server:
        logger.info("声码器服务已启动: %s:%d (backend=%s)", host, server.port, vocoder.name)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            logger.info("收到中断信号，正在关闭服务")
