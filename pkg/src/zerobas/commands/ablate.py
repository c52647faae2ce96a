"""ablate command handler.

在本地语料上逐行运行消融矩阵，每行输出一份语料报告。
"""

from __future__ import annotations

from argparse import Namespace
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from zerobas.commands.common import EXIT_OK, RunSpec, build_run_spec, list_wavs
from zerobas.core import PoseTrack, Waveform
from zerobas.dataio import read_trajectory, read_wav
from zerobas.errors import InvalidInputError
from zerobas.logging_config import get_logger
from zerobas.metrics import CorpusReport, MetricReport, evaluate_pair
from zerobas.pipeline import binauralize

logger = get_logger(__name__)


@dataclass(frozen=True)
class AblationRow:
    name: str
    overrides: dict[str, Any] = field(default_factory=dict)


ABLATION_ROWS: tuple[AblationRow, ...] = (
    AblationRow("full"),
    AblationRow("no-as", {"enable_as": False}),
    AblationRow("no-gtw", {"enable_gtw": False}),
    AblationRow("no-as-gtw", {"enable_as": False, "enable_gtw": False}),
    AblationRow("no-refine", {"iterations": 0}),
    AblationRow("noise-init", {"noise_init": True, "iterations": 5}),
    AblationRow("swap-order", {"swap_order": True}),
    *(AblationRow(f"iterations-{n}", {"iterations": n}) for n in range(1, 6)),
)


def select_rows(names: list[str] | None) -> list[AblationRow]:
    if not names:
        return list(ABLATION_ROWS)
    by_name = {row.name: row for row in ABLATION_ROWS}
    unknown = [name for name in names if name not in by_name]
    if unknown:
        raise InvalidInputError(f"unknown ablation rows: {', '.join(unknown)}; available: {', '.join(by_name)}")
    return [by_name[name] for name in names]


@dataclass(frozen=True)
class Utterance:
    name: str
    mono: Waveform
    track: PoseTrack
    reference: Waveform


def load_corpus(input_dir: Path, reference_dir: Path) -> list[Utterance]:
    """读取 <name>.wav + <stem>.csv 与同名参考双耳录音"""
    inputs = list_wavs(input_dir)
    references = list_wavs(reference_dir)
    missing = sorted(set(inputs) - set(references))
    if missing:
        raise InvalidInputError(f"missing references: {', '.join(missing)}")
    if not inputs:
        raise InvalidInputError(f"no .wav files in {input_dir}")
    return [
        Utterance(
            name=name,
            mono=read_wav(path),
            track=read_trajectory(path.with_suffix(".csv")),
            reference=read_wav(references[name]),
        )
        for name, path in inputs.items()
    ]


def run_row(spec: RunSpec, row: AblationRow, corpus: list[Utterance], *, align: bool = False) -> CorpusReport:
    row_spec = spec.with_pipeline(**row.overrides)

    with row_spec.build_vocoder() as vocoder:

        def _one(utt: Utterance) -> MetricReport:
            synthesized = binauralize(utt.mono, utt.track, row_spec.pipeline, vocoder, row_spec.stft, row_spec.mel)
            reference = utt.reference
            if reference.sample_rate != synthesized.sample_rate:
                raise InvalidInputError(
                    f"{utt.name}: reference rate {reference.sample_rate} != output rate {synthesized.sample_rate}"
                )
            if not align:
                length = min(reference.num_samples, synthesized.num_samples)
                reference = Waveform(reference.samples[:, :length], reference.sample_rate)
                synthesized = Waveform(synthesized.samples[:, :length], synthesized.sample_rate)
            return evaluate_pair(reference, synthesized, row_spec.stft, align=align, name=utt.name)

        with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
            reports = tuple(pool.map(_one, corpus))
    return CorpusReport(reports)


def handle_ablate(args: Namespace) -> int:
    spec = build_run_spec(args, input=args.input, reference=args.reference, output=args.out)
    rows = select_rows(args.rows)
    corpus = load_corpus(spec.inputs["input"], spec.inputs["reference"])
    logger.info("消融实验: %d 行 x %d 条语音", len(rows), len(corpus))

    for row in rows:
        report = run_row(spec, row, corpus, align=args.align)
        means = " ".join(f"{k}={v:.6f}" for k, v in report.means().items())
        print(f"row={row.name} n={len(report)} {means}")
        if spec.output is not None:
            spec.output.mkdir(parents=True, exist_ok=True)
            (spec.output / f"{row.name}.json").write_text(report.to_json(), encoding="utf-8")
            (spec.output / f"{row.name}.txt").write_text(report.to_text(), encoding="utf-8")
    if spec.output is not None:
        print(f"[OK] 报告已写入 {spec.output}")
    return EXIT_OK
