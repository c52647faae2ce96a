"""主入口：支持多种子命令"""

import argparse
from pathlib import Path

from zerobas import __version__
from zerobas.commands import (
    handle_ablate,
    handle_binauralize,
    handle_dataset_prep,
    handle_evaluate,
    handle_serve_vocoder,
)
from zerobas.commands.ablate import ABLATION_ROWS
from zerobas.commands.common import BIT_DEPTHS, add_common_arguments, add_pipeline_arguments, run_guarded
from zerobas.config import Config
from zerobas.logging_config import get_logger, setup_logging
from zerobas.spatial import DEFAULT_EAR_OFFSET, CoordinateFrame

logger = get_logger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

HANDLERS = {
    "binauralize": handle_binauralize,
    "evaluate": handle_evaluate,
    "dataset-prep": handle_dataset_prep,
    "ablate": handle_ablate,
    "serve-vocoder": handle_serve_vocoder,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zerobas", description="ZeroBAS 单声道到双耳语音合成")
    parser.add_argument("--version", action="version", version=f"zerobas {__version__}")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=LOG_LEVELS,
        default=None,
        help="日志级别（默认读取 LOG_LEVEL，未设置时为 INFO）",
    )
    subparsers = parser.add_subparsers(dest="command", help="可用命令")

    bin_parser = subparsers.add_parser("binauralize", help="将单声道 WAV 渲染为双耳 WAV")
    bin_parser.add_argument("--input", type=Path, required=True, help="单声道 WAV，或包含多个 WAV 的目录")
    bin_parser.add_argument("--trajectory", type=Path, required=True, help="轨迹 CSV，批量模式下为 <stem>.csv 所在目录")
    bin_parser.add_argument("--output", type=Path, required=True, help="输出 WAV，批量模式下为输出目录")
    bin_parser.add_argument("--bit-depth", type=int, choices=BIT_DEPTHS, default=None, help="输出位深（默认 32 float）")
    add_pipeline_arguments(bin_parser)
    add_common_arguments(bin_parser)

    eval_parser = subparsers.add_parser("evaluate", help="按文件名配对计算客观指标")
    eval_parser.add_argument("--reference", type=Path, required=True, help="参考双耳录音目录")
    eval_parser.add_argument("--hypothesis", type=Path, required=True, help="合成结果目录")
    eval_parser.add_argument("--align", action="store_true", help="评估前以互相关对齐")
    eval_parser.add_argument("--json", type=Path, default=None, help="同时写出 JSON 报告")
    eval_parser.add_argument("--fft-size", type=int, default=None, help="指标 STFT 帧长（默认 1024）")
    eval_parser.add_argument("--hop", type=int, default=None, help="指标 STFT 帧移（默认 256）")
    add_common_arguments(eval_parser)

    prep_parser = subparsers.add_parser("dataset-prep", help="按事件清单切分录音并生成静态轨迹")
    prep_parser.add_argument("--recordings", type=Path, required=True, help="录音目录（<recording_id>.wav）")
    prep_parser.add_argument("--manifest", type=Path, required=True, help="事件清单 CSV")
    prep_parser.add_argument("--out", type=Path, required=True, help="输出目录")
    prep_parser.add_argument(
        "--frame",
        type=str,
        choices=[f.value for f in CoordinateFrame],
        default=CoordinateFrame.X_FORWARD_Y_LEFT.value,
        help="标注坐标轴约定",
    )
    prep_parser.add_argument("--ear-offset", type=float, default=DEFAULT_EAR_OFFSET, help="双耳间距的一半（米）")
    prep_parser.add_argument("--bit-depth", type=int, choices=BIT_DEPTHS, default=None, help="输出位深（默认 32 float）")

    ablate_parser = subparsers.add_parser("ablate", help="在本地语料上运行消融矩阵")
    ablate_parser.add_argument("--input", type=Path, required=True, help="单声道 WAV 与同名轨迹 CSV 所在目录")
    ablate_parser.add_argument("--reference", type=Path, required=True, help="参考双耳录音目录")
    ablate_parser.add_argument("--out", type=Path, default=None, help="逐行报告输出目录")
    ablate_parser.add_argument(
        "--rows",
        nargs="+",
        choices=[row.name for row in ABLATION_ROWS],
        default=None,
        help="只运行指定行（默认全部）",
    )
    ablate_parser.add_argument("--align", action="store_true", help="评估前以互相关对齐")
    add_pipeline_arguments(ablate_parser)
    add_common_arguments(ablate_parser)

    serve_parser = subparsers.add_parser("serve-vocoder", help="以线协议提供内置去噪后端")
    serve_parser.add_argument("--host", type=str, default="127.0.0.1", help="监听地址（默认 127.0.0.1）")
    serve_parser.add_argument("--port", type=int, default=9555, help="监听端口（默认 9555）")
    serve_parser.add_argument(
        "--backend", type=str, default="spectral-gate", help="identity | spectral-gate（默认 spectral-gate）"
    )
    serve_parser.add_argument("--fft-size", type=int, default=1024, help="谱门限 STFT 帧长")
    serve_parser.add_argument("--hop", type=int, default=256, help="谱门限 STFT 帧移")
    serve_parser.add_argument("--max-payload", type=int, default=64 * 1024 * 1024, help="单帧载荷上限（字节）")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logging(level=args.log_level or Config.get_log_level(), log_file=Config.get_log_file())

    handler = HANDLERS.get(args.command)
    if handler is None:
        parser.print_help()
        return 0
    logger.debug("执行命令 %s", args.command)
    return run_guarded(handler, args)


if __name__ == "__main__":
    raise SystemExit(main())
