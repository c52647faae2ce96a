"""异常层次结构

所有库内异常都继承自 ZeroBASError，CLI 根据异常类别映射退出码：
- InvalidInputError / ConfigError -> 2
- AudioFormatError / OSError -> 3
- VocoderError -> 4
"""

from __future__ import annotations


class ZeroBASError(Exception):
    """ZeroBAS 异常基类"""


class InvalidInputError(ZeroBASError, ValueError):
    """输入参数或数据不满足前置条件"""


class DegenerateGeometryError(InvalidInputError):
    """几何退化（耳朵与声源重合，距离比无定义）"""


class InvalidManifestError(InvalidInputError):
    """事件清单中存在非法行

    Attributes:
        rows: 出错的行号（从 1 开始，不含表头）
    """

    def __init__(self, message: str, rows: list[int] | None = None):
        self.rows = list(rows or [])
        if self.rows:
            message = f"{message} (rows: {', '.join(str(r) for r in self.rows)})"
        super().__init__(message)


class ConfigError(ZeroBASError):
    """配置文件缺失或格式错误"""


class AudioFormatError(ZeroBASError):
    """音频文件解析失败"""


class UnsupportedCodecError(AudioFormatError):
    """不支持的编码（仅支持 16/24 bit PCM 与 32 bit float）"""


class TruncatedFileError(AudioFormatError):
    """文件被截断"""


class HeaderMismatchError(AudioFormatError):
    """RIFF/WAVE 头不匹配"""


class VocoderError(ZeroBASError):
    """声码器阶段失败"""


class RefinementError(VocoderError):
    """迭代精炼中某一次调用失败

    Attributes:
        iteration: 出错时的迭代序号 i（N..1）
        channel: 声道名称（left / right / mono）
    """

    def __init__(self, message: str, *, iteration: int, channel: str):
        self.iteration = iteration
        self.channel = channel
        super().__init__(f"{message} (iteration={iteration}, channel={channel})")


class ExternalVocoderError(VocoderError):
    """外部声码器后端错误基类"""


class VocoderTimeoutError(ExternalVocoderError):
    """请求超时"""


class VocoderConnectionError(ExternalVocoderError):
    """连接被拒绝或中断"""


class MalformedResponseError(ExternalVocoderError):
    """响应帧格式错误"""


class LengthMismatchError(ExternalVocoderError):
    """响应采样数与请求不一致"""


class BackendReportedError(ExternalVocoderError):
    """后端返回非零状态码"""

    def __init__(self, status: int, message: str):
        self.status = status
        self.backend_message = message
        super().__init__(f"backend error status={status}: {message}")
