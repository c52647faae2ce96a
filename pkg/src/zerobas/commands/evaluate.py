"""evaluate command handler."""

from __future__ import annotations

from argparse import Namespace
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from zerobas.commands.common import EXIT_OK, build_run_spec, list_wavs
from zerobas.dataio import read_wav
from zerobas.errors import InvalidInputError
from zerobas.features import StftConfig
from zerobas.logging_config import get_logger
from zerobas.metrics import CorpusReport, MetricReport, evaluate_pair

logger = get_logger(__name__)


def match_files(reference_dir: Path, hypothesis_dir: Path) -> list[tuple[str, Path, Path]]:
    """按文件名配对；两侧集合不一致时列出差异"""
    references = list_wavs(reference_dir)
    hypotheses = list_wavs(hypothesis_dir)
    missing = sorted(set(references) - set(hypotheses))
    extra = sorted(set(hypotheses) - set(references))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing hypotheses: {', '.join(missing)}")
        if extra:
            parts.append(f"unmatched hypotheses: {', '.join(extra)}")
        raise InvalidInputError("; ".join(parts))
    if not references:
        raise InvalidInputError(f"no .wav files in {reference_dir}")
    return [(name, references[name], hypotheses[name]) for name in references]


def evaluate_corpus(
    pairs: list[tuple[str, Path, Path]], cfg: StftConfig, *, align: bool = False, jobs: int = 1
) -> CorpusReport:
    def _one(pair: tuple[str, Path, Path]) -> MetricReport:
        name, reference, hypothesis = pair
        report = evaluate_pair(read_wav(reference), read_wav(hypothesis), cfg, align=align, name=name)
        logger.debug("评估 %s: %s", name, report.values())
        return report

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        reports = tuple(pool.map(_one, pairs))
    return CorpusReport(reports)


def handle_evaluate(args: Namespace) -> int:
    spec = build_run_spec(args, reference=args.reference, hypothesis=args.hypothesis, output=args.json)
    pairs = match_files(spec.inputs["reference"], spec.inputs["hypothesis"])
    logger.info("评估 %d 对文件（align=%s）", len(pairs), args.align)
    report = evaluate_corpus(pairs, spec.stft, align=args.align, jobs=spec.jobs)

    print(report.to_text(), end="")
    if spec.output is not None:
        spec.output.parent.mkdir(parents=True, exist_ok=True)
        spec.output.write_text(report.to_json(), encoding="utf-8")
        print(f"[OK] 报告已写入 {spec.output}")
    return EXIT_OK
