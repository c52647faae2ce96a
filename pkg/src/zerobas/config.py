"""配置管理 - 环境变量与 YAML 配置文件

优先级：命令行参数 > ZEROBAS_CONFIG 指向的配置文件 > 内置默认值
"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from zerobas.errors import ConfigError
from zerobas.logging_config import get_logger

logger = get_logger(__name__)

SECTION_KEYS: dict[str, set[str]] = {
    "pipeline": {
        "iterations",
        "noise_level",
        "speed_of_sound",
        "vocoder",
        "enable_gtw",
        "enable_as",
        "swap_order",
        "noise_init",
        "seed",
        "sample_rate",
    },
    "stft": {"fft_size", "hop"},
    "mel": {"mel_bins", "f_min", "f_max", "floor"},
    "vocoder_endpoint": {"timeout", "max_payload", "connect_retries"},
}


class Config:
    """全局配置管理器"""

    # 日志配置
    @staticmethod
    def get_log_level() -> str:
        """获取日志级别"""
        return os.environ.get("LOG_LEVEL", "INFO")

    @staticmethod
    def get_log_file() -> Path | None:
        """获取日志文件路径"""
        log_file = os.environ.get("LOG_FILE")
        return Path(log_file) if log_file else None

    # 配置文件
    @staticmethod
    def get_config_path() -> Path | None:
        """获取配置文件路径（ZEROBAS_CONFIG）"""
        path = os.environ.get("ZEROBAS_CONFIG")
        return Path(path) if path else None

    # 并发
    @staticmethod
    def get_default_jobs() -> int:
        """获取默认并发数

        优先级: ZEROBAS_JOBS > 逻辑核数
        """
        value = os.environ.get("ZEROBAS_JOBS")
        if value:
            try:
                jobs = int(value)
            except ValueError as e:
                raise ConfigError(f"ZEROBAS_JOBS must be an integer, got {value!r}") from e
            if jobs < 1:
                raise ConfigError(f"ZEROBAS_JOBS must be >= 1, got {jobs}")
            return jobs
        return os.cpu_count() or 1


@dataclass(frozen=True)
class FileSettings:
    """配置文件内容，按小节拆分"""

    pipeline: dict[str, Any] = field(default_factory=dict)
    stft: dict[str, Any] = field(default_factory=dict)
    mel: dict[str, Any] = field(default_factory=dict)
    vocoder_endpoint: dict[str, Any] = field(default_factory=dict)
    jobs: int | None = None


def load_config_file(path: Path) -> dict[str, Any]:
    """读取 YAML 配置文件

    Raises:
        ConfigError: 文件不存在、YAML 格式错误或顶层不是映射
    """
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed YAML in {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping, got {type(data).__name__}")
    logger.info("加载配置文件: %s", path)
    return data


def parse_settings(data: dict[str, Any], source: str = "config") -> FileSettings:
    """校验小节与键名，返回 FileSettings"""
    unknown = set(data) - set(SECTION_KEYS) - {"jobs"}
    if unknown:
        raise ConfigError(f"{source}: unknown sections {sorted(unknown)}")
    sections: dict[str, dict[str, Any]] = {}
    for name, allowed in SECTION_KEYS.items():
        section = data.get(name) or {}
        if not isinstance(section, dict):
            raise ConfigError(f"{source}: section '{name}' must be a mapping")
        bad_keys = set(section) - allowed
        if bad_keys:
            raise ConfigError(f"{source}: unknown keys in '{name}': {sorted(bad_keys)}")
        sections[name] = dict(section)
    jobs = data.get("jobs")
    if jobs is not None and (not isinstance(jobs, int) or isinstance(jobs, bool) or jobs < 1):
        raise ConfigError(f"{source}: jobs must be a positive integer, got {jobs!r}")
    return FileSettings(jobs=jobs, **sections)


def load_settings(path: Path | None = None) -> FileSettings:
    """加载配置；未指定路径时读取 ZEROBAS_CONFIG，均未设置时返回空配置"""
    path = path or Config.get_config_path()
    if path is None:
        return FileSettings()
    return parse_settings(load_config_file(path), source=str(path))
