"""共享测试夹具：确定性的 1 秒单声道信号与运动轨迹"""

from pathlib import Path

import numpy as np
import pytest

from zerobas.core import PoseTrack, Waveform
from zerobas.dataio import write_trajectory, write_wav

FIXTURE_RATE = 16000
EAR_OFFSET = 0.09


def make_speechlike(sample_rate: int = FIXTURE_RATE, duration: float = 1.0, seed: int = 1234) -> np.ndarray:
    """谐波 + 少量噪声，幅度约 0.5"""
    rng = np.random.default_rng(seed)
    t = np.arange(int(sample_rate * duration)) / sample_rate
    f0 = 140.0 + 20.0 * np.sin(2 * np.pi * 3.0 * t)
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate
    harmonics = sum(np.sin(h * phase) / h for h in range(1, 8))
    envelope = 0.5 + 0.5 * np.sin(2 * np.pi * 4.0 * t) ** 2
    signal = 0.3 * envelope * harmonics + 0.01 * rng.standard_normal(t.size)
    return signal / np.max(np.abs(signal)) * 0.5


def orbit_track(duration: float = 1.0, radius: float = 1.5, frames: int = 11) -> PoseTrack:
    """声源绕听者转半圈，听者位于原点朝向 +x"""
    times = np.linspace(0.0, duration, frames)
    angles = np.linspace(-np.pi / 2, np.pi / 2, frames)
    src = np.stack([radius * np.cos(angles), radius * np.sin(angles), np.zeros(frames)], axis=1)
    ear_l = np.tile([0.0, EAR_OFFSET, 0.0], (frames, 1))
    ear_r = np.tile([0.0, -EAR_OFFSET, 0.0], (frames, 1))
    return PoseTrack(times=times, p_src=src, p_ear_l=ear_l, p_ear_r=ear_r)


@pytest.fixture
def mono() -> Waveform:
    return Waveform.mono(make_speechlike(), FIXTURE_RATE)


@pytest.fixture
def track() -> PoseTrack:
    return orbit_track()


@pytest.fixture
def fixture_files(tmp_path: Path, mono: Waveform, track: PoseTrack) -> tuple[Path, Path]:
    """写出 float32 单声道 WAV 与轨迹 CSV"""
    wav = write_wav(tmp_path / "inputs" / "utt.wav", mono)
    csv = write_trajectory(tmp_path / "inputs" / "utt.csv", track)
    return wav, csv


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
