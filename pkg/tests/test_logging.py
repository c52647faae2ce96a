"""测试日志配置"""

import logging
import tempfile
from pathlib import Path

from zerobas.logging_config import get_logger, setup_logging


def test_setup_logging_console_only():
    """测试仅控制台日志"""
    logger = setup_logging(level="DEBUG")

    assert logger.name == "zerobas"
    root_logger = logging.getLogger()
    assert root_logger.level == logging.DEBUG
    assert len(root_logger.handlers) == 1


def test_setup_logging_with_file():
    """测试带文件日志"""
    with tempfile.TemporaryDirectory() as tmpdir:
        log_file = Path(tmpdir) / "logs" / "zerobas.log"
        logger = setup_logging(level="INFO", log_file=log_file)

        get_logger("pipeline").info("渲染完成")
        for handler in logging.getLogger().handlers:
            handler.flush()

        assert log_file.exists()
        assert "渲染完成" in log_file.read_text(encoding="utf-8")
        assert logger.name == "zerobas"
        for handler in logging.getLogger().handlers:
            handler.close()
        logging.getLogger().handlers.clear()


def test_get_logger():
    """测试获取命名 logger"""
    logger = get_logger("test_module")

    assert logger.name == "zerobas.test_module"
    assert isinstance(logger, logging.Logger)


def test_get_logger_with_module_name():
    """模块 __name__ 不重复加前缀"""
    assert get_logger("zerobas.vocoder.external").name == "zerobas.vocoder.external"
    assert get_logger("zerobas").name == "zerobas"


def test_multiple_setup_calls():
    """测试多次调用 setup_logging"""
    setup_logging(level="INFO")
    setup_logging(level="WARNING")

    root_logger = logging.getLogger()
    assert root_logger.level == logging.WARNING
    assert len(root_logger.handlers) == 1
