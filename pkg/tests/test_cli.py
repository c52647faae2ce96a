"""测试命令行入口与各子命令"""

import json
import socket
from pathlib import Path

import numpy as np
import pytest
import soundfile as sf

from zerobas import __version__
from zerobas.__main__ import main
from zerobas.core import Waveform
from zerobas.dataio import read_trajectory, read_wav, write_trajectory, write_wav
from zerobas.dataio.tables import MANIFEST_COLUMNS
from zerobas.metrics import REPORT_SCHEMA

from .conftest import FIXTURE_RATE, make_speechlike, orbit_track

QUIET = ["--log-level", "ERROR"]
FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("ZEROBAS_CONFIG", "ZEROBAS_JOBS", "LOG_FILE"):
        monkeypatch.delenv(name, raising=False)


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _sample_bytes(path: Path) -> bytes:
    # float WAV 的 PEAK 块带写出时间戳，只比较采样数据
    w = read_wav(path)
    return w.samples.tobytes() + w.sample_rate.to_bytes(4, "little")


def _binauralize(wav: Path, csv: Path, out: Path, *extra: str) -> int:
    return main([*QUIET, "binauralize", "--input", str(wav), "--trajectory", str(csv), "--output", str(out), *extra])


class TestEntry:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert f"zerobas {__version__}" in capsys.readouterr().out

    def test_no_command_prints_help(self, capsys):
        assert main(QUIET) == 0
        assert "binauralize" in capsys.readouterr().out

    def test_argparse_rejects_bit_depth(self, fixture_files, tmp_path):
        wav, csv = fixture_files
        with pytest.raises(SystemExit) as exc_info:
            _binauralize(wav, csv, tmp_path / "o.wav", "--bit-depth", "8")
        assert exc_info.value.code == 2


class TestBinauralize:
    def test_single_file(self, fixture_files, tmp_path, capsys):
        wav, csv = fixture_files
        out = tmp_path / "out" / "utt.wav"
        assert _binauralize(wav, csv, out) == 0
        assert f"[OK] {out}" in capsys.readouterr().out
        stereo = read_wav(out)
        assert stereo.channels == 2
        assert stereo.num_samples == FIXTURE_RATE
        assert stereo.sample_rate == FIXTURE_RATE

    def test_two_runs_are_byte_identical(self, fixture_files, tmp_path):
        wav, csv = fixture_files
        flags = ("--vocoder", "spectral-gate", "--noise-init", "--seed", "3")
        assert _binauralize(wav, csv, tmp_path / "a.wav", *flags) == 0
        assert _binauralize(wav, csv, tmp_path / "b.wav", *flags) == 0
        assert _sample_bytes(tmp_path / "a.wav") == _sample_bytes(tmp_path / "b.wav")

    def test_golden_output(self, tmp_path):
        samples = np.loadtxt(FIXTURES / "golden_input.txt", dtype=np.float32)
        wav = write_wav(tmp_path / "golden.wav", Waveform.mono(samples, 3430))
        out = tmp_path / "golden_binaural.wav"
        assert _binauralize(wav, FIXTURES / "golden_track.csv", out) == 0

        expected = np.loadtxt(FIXTURES / "golden_output.txt", dtype=np.float32).T
        stereo = read_wav(out)
        assert stereo.sample_rate == 3430
        assert stereo.dtype == np.float32
        assert stereo.samples.tobytes() == np.ascontiguousarray(expected).tobytes()

    def test_zero_iterations_skips_backend(self, fixture_files, tmp_path):
        wav, csv = fixture_files
        assert _binauralize(wav, csv, tmp_path / "a.wav", "--iterations", "0", "--vocoder", "spectral-gate") == 0
        assert _binauralize(wav, csv, tmp_path / "b.wav") == 0
        assert _sample_bytes(tmp_path / "a.wav") == _sample_bytes(tmp_path / "b.wav")

    def test_no_stages_duplicates_input(self, fixture_files, tmp_path):
        wav, csv = fixture_files
        out = tmp_path / "dup.wav"
        assert _binauralize(wav, csv, out, "--no-gtw", "--no-as") == 0
        stereo, mono = read_wav(out), read_wav(wav)
        np.testing.assert_array_equal(stereo.channel(0), mono.channel(0))
        np.testing.assert_array_equal(stereo.channel(1), mono.channel(0))

    def test_pcm16_output(self, fixture_files, tmp_path):
        wav, csv = fixture_files
        out = tmp_path / "pcm.wav"
        assert _binauralize(wav, csv, out, "--bit-depth", "16") == 0
        assert sf.info(str(out)).subtype == "PCM_16"

    def test_batch_directory(self, tmp_path, capsys):
        inputs = tmp_path / "batch"
        for i in range(2):
            write_wav(inputs / f"u{i}.wav", Waveform.mono(make_speechlike(seed=i), FIXTURE_RATE))
            write_trajectory(inputs / f"u{i}.csv", orbit_track())
        out_dir = tmp_path / "rendered"
        assert _binauralize(inputs, inputs, out_dir, "--jobs", "2") == 0
        assert sorted(p.name for p in out_dir.iterdir()) == ["u0.wav", "u1.wav"]
        assert "[OK] 共渲染 2 个文件" in capsys.readouterr().out

    def test_batch_missing_trajectory(self, tmp_path, capsys):
        inputs = tmp_path / "batch"
        write_wav(inputs / "u0.wav", Waveform.mono(make_speechlike(), FIXTURE_RATE))
        assert _binauralize(inputs, inputs, tmp_path / "out") == 2
        assert "u0.csv" in capsys.readouterr().err


class TestExitCodes:
    @pytest.mark.parametrize("flags", [["--iterations", "-1"], ["--fft-size", "1000"], ["--vocoder", "neural"]])
    def test_invalid_input(self, fixture_files, tmp_path, capsys, flags):
        wav, csv = fixture_files
        assert _binauralize(wav, csv, tmp_path / "o.wav", *flags) == 2
        assert capsys.readouterr().err.startswith("[ERROR] ")

    def test_unknown_config_key(self, fixture_files, tmp_path, capsys):
        wav, csv = fixture_files
        config = tmp_path / "bad.yml"
        config.write_text("pipeline:\n  iteration: 2\n", encoding="utf-8")
        assert _binauralize(wav, csv, tmp_path / "o.wav", "--config", str(config)) == 2
        assert "ConfigError" in capsys.readouterr().err

    def test_missing_input(self, fixture_files, tmp_path):
        _, csv = fixture_files
        assert _binauralize(tmp_path / "none.wav", csv, tmp_path / "o.wav") == 3

    def test_corrupt_input(self, fixture_files, tmp_path, capsys):
        _, csv = fixture_files
        bad = tmp_path / "bad.wav"
        bad.write_bytes(b"OggS" + b"\x00" * 60)
        assert _binauralize(bad, csv, tmp_path / "o.wav") == 3
        assert "HeaderMismatchError" in capsys.readouterr().err

    def test_unreachable_vocoder(self, fixture_files, tmp_path, capsys):
        wav, csv = fixture_files
        config = tmp_path / "endpoint.yml"
        config.write_text("vocoder_endpoint:\n  connect_retries: 0\n  timeout: 2\n", encoding="utf-8")
        code = _binauralize(
            wav, csv, tmp_path / "o.wav", "--vocoder", f"external:127.0.0.1:{_free_port()}", "--config", str(config)
        )
        assert code == 4
        assert not (tmp_path / "o.wav").exists()
        assert "RefinementError" in capsys.readouterr().err

    def test_serve_rejects_external_backend(self):
        assert main([*QUIET, "serve-vocoder", "--backend", "external:127.0.0.1:1"]) == 2


@pytest.fixture
def rendered_corpus(fixture_files, tmp_path):
    """inputs/utt.wav + utt.csv 与其 identity 渲染结果 reference/utt.wav"""
    wav, csv = fixture_files
    reference = tmp_path / "reference"
    assert _binauralize(wav, csv, reference / "utt.wav") == 0
    return wav.parent, reference


class TestEvaluate:
    def test_identical_corpus(self, rendered_corpus, tmp_path, capsys):
        _, reference = rendered_corpus
        report = tmp_path / "report.json"
        code = main([*QUIET, "evaluate", "--reference", str(reference), "--hypothesis", str(reference), "--json", str(report)])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("utterance=utt.wav wave_l2=0.000000")
        assert lines[1].startswith("corpus n=1 ")
        data = json.loads(report.read_text(encoding="utf-8"))
        assert data["schema"] == REPORT_SCHEMA
        assert data["corpus"]["wave_l2"] == 0.0

    def test_known_delay_matches_scalar_oracle(self, rendered_corpus, tmp_path):
        _, reference = rendered_corpus
        gt = read_wav(reference / "utt.wav")
        delayed = np.concatenate([np.zeros((2, 10), dtype=gt.dtype), gt.samples[:, :-10]], axis=1)
        write_wav(tmp_path / "hyp" / "utt.wav", Waveform(delayed, gt.sample_rate))
        report = tmp_path / "report.json"
        argv = ["evaluate", "--reference", str(reference), "--hypothesis", str(tmp_path / "hyp"), "--json", str(report)]
        assert main([*QUIET, *argv]) == 0

        total = 0.0
        for ch in range(2):
            a, b = gt.channel(ch), delayed[ch]
            total += sum((float(a[i]) - float(b[i])) ** 2 for i in range(gt.num_samples))
        expected = total / (2 * gt.num_samples) * 1e3
        data = json.loads(report.read_text(encoding="utf-8"))
        assert data["corpus"]["wave_l2"] == pytest.approx(expected, rel=1e-9)

    def test_align_reports_lag(self, rendered_corpus, tmp_path, capsys):
        _, reference = rendered_corpus
        gt = read_wav(reference / "utt.wav")
        delayed = np.concatenate([np.zeros((2, 25), dtype=gt.dtype), gt.samples[:, :-25]], axis=1)
        write_wav(tmp_path / "hyp" / "utt.wav", Waveform(delayed, gt.sample_rate))
        code = main([*QUIET, "evaluate", "--reference", str(reference), "--hypothesis", str(tmp_path / "hyp"), "--align"])
        assert code == 0
        assert "lag=-25" in capsys.readouterr().out

    def test_missing_hypothesis(self, rendered_corpus, tmp_path, capsys):
        _, reference = rendered_corpus
        (tmp_path / "hyp").mkdir()
        code = main([*QUIET, "evaluate", "--reference", str(reference), "--hypothesis", str(tmp_path / "hyp")])
        assert code == 2
        assert "missing hypotheses: utt.wav" in capsys.readouterr().err

    def test_missing_directory(self, rendered_corpus, tmp_path):
        _, reference = rendered_corpus
        code = main([*QUIET, "evaluate", "--reference", str(reference), "--hypothesis", str(tmp_path / "nowhere")])
        assert code == 3


def _manifest(path: Path, rows: list[tuple]) -> Path:
    lines = [",".join(MANIFEST_COLUMNS)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestDatasetPrep:
    def test_three_events(self, tmp_path, capsys):
        recordings = tmp_path / "recordings"
        write_wav(recordings / "rec1.wav", Waveform.mono(make_speechlike(duration=2.0), FIXTURE_RATE))
        manifest = _manifest(
            tmp_path / "events.csv",
            [("rec1", 0.5, 1.0, 90, 0, 2.0), ("rec1", 0.8, 1.5, -30, 10, 1.0), ("rec1", 1.5, 2.0, 0, 0, 1.5)],
        )
        out = tmp_path / "prepared"
        code = main([*QUIET, "dataset-prep", "--recordings", str(recordings), "--manifest", str(manifest), "--out", str(out)])
        assert code == 0
        assert "[OK] 共生成 3 对文件" in capsys.readouterr().out
        assert sorted(p.name for p in out.glob("*.wav")) == [
            "rec1_0000500ms.wav",
            "rec1_0000800ms.wav",
            "rec1_0001500ms.wav",
        ]
        assert read_wav(out / "rec1_0000800ms.wav").num_samples == 11200

        track = read_trajectory(out / "rec1_0000500ms.csv")
        np.testing.assert_allclose(track.p_src[0], [0.0, 2.0, 0.0], atol=1e-9)
        np.testing.assert_allclose(track.p_ear_l[0], [0.0, 0.09, 0.0])

        pair = out / "rec1_0000500ms"
        assert _binauralize(pair.with_suffix(".wav"), pair.with_suffix(".csv"), tmp_path / "b.wav") == 0

    def test_right_forward_frame(self, tmp_path):
        recordings = tmp_path / "recordings"
        write_wav(recordings / "rec1.wav", Waveform.mono(np.zeros(FIXTURE_RATE), FIXTURE_RATE))
        manifest = _manifest(tmp_path / "events.csv", [("rec1", 0.0, 0.5, 0, 0, 1.0)])
        out = tmp_path / "prepared"
        argv = ["dataset-prep", "--recordings", str(recordings), "--manifest", str(manifest), "--out", str(out)]
        assert main([*QUIET, *argv, "--frame", "y-forward-x-right"]) == 0
        # 方位角 0 在该约定下指向 +x，即听者右侧
        track = read_trajectory(out / "rec1_0000000ms.csv")
        np.testing.assert_allclose(track.p_src[0], [0.0, -1.0, 0.0], atol=1e-12)

    def test_bad_rows_reported(self, tmp_path, capsys):
        recordings = tmp_path / "recordings"
        write_wav(recordings / "rec1.wav", Waveform.mono(np.zeros(FIXTURE_RATE), FIXTURE_RATE))
        manifest = _manifest(tmp_path / "events.csv", [("rec1", 0.0, 0.5, 0, 0, 1.0), ("rec1", 0.5, 3.0, 0, 0, 1.0)])
        argv = ["dataset-prep", "--recordings", str(recordings), "--manifest", str(manifest), "--out", str(tmp_path / "o")]
        assert main([*QUIET, *argv]) == 2
        assert "rows: 2" in capsys.readouterr().err

    def test_same_onset_rejected_before_writing(self, tmp_path, capsys):
        recordings = tmp_path / "recordings"
        write_wav(recordings / "rec1.wav", Waveform.mono(np.zeros(FIXTURE_RATE * 2), FIXTURE_RATE))
        manifest = _manifest(
            tmp_path / "events.csv",
            [("rec1", 0.2, 0.4, 0, 0, 1.0), ("rec1", 0.5, 1.0, 90, 0, 2.0), ("rec1", 0.5002, 0.9, -90, 0, 1.0)],
        )
        out = tmp_path / "o"
        argv = ["dataset-prep", "--recordings", str(recordings), "--manifest", str(manifest), "--out", str(out)]
        assert main([*QUIET, *argv]) == 2
        assert "rows: 2, 3" in capsys.readouterr().err
        assert not out.exists() or not any(out.iterdir())


class TestAblate:
    def test_selected_rows(self, rendered_corpus, tmp_path, capsys):
        inputs, reference = rendered_corpus
        out = tmp_path / "ablation"
        argv = ["ablate", "--input", str(inputs), "--reference", str(reference), "--rows", "full", "no-refine"]
        assert main([*QUIET, *argv, "--out", str(out)]) == 0
        lines = [line for line in capsys.readouterr().out.splitlines() if line.startswith("row=")]
        assert len(lines) == 2
        assert lines[0].startswith("row=full n=1 wave_l2=0.000000")
        assert lines[1].startswith("row=no-refine n=1 wave_l2=0.000000")
        assert (out / "full.json").is_file()
        assert (out / "no-refine.txt").read_text(encoding="utf-8").splitlines()[-1].startswith("corpus n=1")

    def test_disabled_stages_differ_from_reference(self, rendered_corpus, capsys):
        inputs, reference = rendered_corpus
        argv = ["ablate", "--input", str(inputs), "--reference", str(reference), "--rows", "no-as-gtw"]
        assert main([*QUIET, *argv]) == 0
        line = next(line for line in capsys.readouterr().out.splitlines() if line.startswith("row="))
        assert "wave_l2=0.000000" not in line

    def test_missing_reference(self, rendered_corpus, tmp_path):
        inputs, _ = rendered_corpus
        (tmp_path / "empty").mkdir()
        assert main([*QUIET, "ablate", "--input", str(inputs), "--reference", str(tmp_path / "empty")]) == 2
