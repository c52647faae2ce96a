"""测试声码器接口、迭代精炼与谱门限后端"""

import threading

import numpy as np
import pytest

from zerobas.core import Waveform
from zerobas.errors import InvalidInputError, RefinementError, VocoderError
from zerobas.features import MelConfig, StftConfig
from zerobas.vocoder import (
    DenoisingVocoder,
    ExternalVocoder,
    IdentityVocoder,
    SpectralGateVocoder,
    build_vocoder,
    identity_refine,
    iterative_refine,
    spectral_gate_refine,
)
from zerobas.vocoder.spectral_gate import threshold_ratio

SMALL_MEL = MelConfig(mel_bins=40)


class CountingVocoder(DenoisingVocoder):
    """记录调用并把信号缩放 0.5"""

    name = "counting"

    def __init__(self):
        self.calls: list[tuple[int, int]] = []
        self.conditions: list[np.ndarray] = []
        self._lock = threading.Lock()

    def refine(self, y, c, k):
        with self._lock:
            self.calls.append((y.num_samples, k))
            self.conditions.append(np.array(c, copy=True))
        return Waveform.mono(y.channel(0) * 0.5, y.sample_rate)


class MutatingVocoder(DenoisingVocoder):
    """返回与输入完全不同的信号，用于检查条件特征不随迭代更新"""

    name = "mutating"

    def __init__(self):
        self.conditions: list[np.ndarray] = []

    def refine(self, y, c, k):
        self.conditions.append(np.array(c, copy=True))
        return Waveform.mono(np.full(y.num_samples, 0.9), y.sample_rate)


class WrongLengthVocoder(DenoisingVocoder):
    def refine(self, y, c, k):
        return Waveform.mono(np.zeros(y.num_samples - 1), y.sample_rate)


@pytest.fixture
def pair(mono):
    x = mono.channel(0)
    return Waveform.stereo(x, 0.5 * x, mono.sample_rate)


class TestIdentity:
    def test_returns_input(self, mono):
        assert identity_refine(mono, np.zeros((1, 1)), 1) is mono

    def test_iterative_refine_with_identity_is_exact(self, pair):
        out = iterative_refine(pair, IdentityVocoder(), 3, 1, mel=SMALL_MEL)
        assert np.array_equal(out.samples, pair.samples)


class TestIterativeRefine:
    def test_applies_vocoder_n_times_per_channel(self, pair):
        vocoder = CountingVocoder()
        out = iterative_refine(pair, vocoder, 4, 2, mel=SMALL_MEL)
        assert len(vocoder.calls) == 8
        assert all(k == 2 for _, k in vocoder.calls)
        np.testing.assert_allclose(out.channel(0), pair.channel(0) * 0.5**4)

    def test_zero_iterations_returns_input(self, pair):
        vocoder = CountingVocoder()
        assert iterative_refine(pair, vocoder, 0, 1) is pair
        assert vocoder.calls == []

    def test_conditioning_computed_before_loop(self, pair):
        vocoder = MutatingVocoder()
        iterative_refine(pair, vocoder, 3, 1, mel=SMALL_MEL)
        left_conditions = vocoder.conditions[:3]
        for c in left_conditions[1:]:
            np.testing.assert_array_equal(c, left_conditions[0])

    def test_conditioning_is_read_only(self, pair):
        seen = []

        class Spy(DenoisingVocoder):
            def refine(self, y, c, k):
                seen.append(c.flags.writeable)
                return y

        iterative_refine(pair, Spy(), 1, 1, mel=SMALL_MEL)
        assert seen == [False, False]

    def test_channels_refined_independently(self, pair):
        joint = iterative_refine(pair, SpectralGateVocoder(), 2, 1, mel=SMALL_MEL)
        left, right = pair.split()
        gated_left = spectral_gate_refine(spectral_gate_refine(left, None, 1), None, 1)
        gated_right = spectral_gate_refine(spectral_gate_refine(right, None, 1), None, 1)
        np.testing.assert_array_equal(joint.channel(0), gated_left.channel(0))
        np.testing.assert_array_equal(joint.channel(1), gated_right.channel(0))

    def test_parallel_matches_sequential(self, pair):
        sequential = iterative_refine(pair, SpectralGateVocoder(), 2, 1, mel=SMALL_MEL)
        parallel = iterative_refine(pair, SpectralGateVocoder(), 2, 1, mel=SMALL_MEL, parallel_channels=True)
        assert np.array_equal(sequential.samples, parallel.samples)

    def test_wrong_length_wrapped_in_refinement_error(self, pair):
        with pytest.raises(RefinementError) as exc_info:
            iterative_refine(pair, WrongLengthVocoder(), 3, 1, mel=SMALL_MEL)
        assert exc_info.value.iteration == 3
        assert exc_info.value.channel == "left"

    def test_noise_start_is_deterministic(self, pair):
        a = iterative_refine(pair, CountingVocoder(), 1, 1, mel=SMALL_MEL, noise_seed=7)
        b = iterative_refine(pair, CountingVocoder(), 1, 1, mel=SMALL_MEL, noise_seed=7)
        c = iterative_refine(pair, CountingVocoder(), 1, 1, mel=SMALL_MEL, noise_seed=8)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)
        assert not np.array_equal(a.channel(0), a.channel(1))

    def test_mono_input_rejected(self, mono):
        with pytest.raises(InvalidInputError):
            iterative_refine(mono, IdentityVocoder(), 1, 1)

    def test_negative_iterations(self, pair):
        with pytest.raises(InvalidInputError):
            iterative_refine(pair, IdentityVocoder(), -1, 1)


class TestSpectralGate:
    def test_threshold_ratio_bounded(self):
        assert threshold_ratio(0) == pytest.approx(1.2)
        assert threshold_ratio(1) == pytest.approx(1.3)
        assert threshold_ratio(100) == pytest.approx(2.0)
        with pytest.raises(InvalidInputError):
            threshold_ratio(-1)

    def test_loud_sine_preserved(self):
        sample_rate = 16000
        t = np.arange(sample_rate) / sample_rate
        sine = Waveform.mono(0.8 * np.sin(2 * np.pi * 440.0 * t), sample_rate)
        out = spectral_gate_refine(sine, None, 1)
        assert out.num_samples == sine.num_samples
        assert np.corrcoef(out.channel(0), sine.channel(0))[0, 1] >= 0.99

    @pytest.mark.parametrize("k", [0, 1, 3])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_three_passes_raise_snr(self, k, seed):
        sample_rate = 16000
        t = np.arange(sample_rate) / sample_rate
        clean = 0.5 * np.sin(2 * np.pi * 440.0 * t)
        noise = np.random.default_rng(seed).standard_normal(sample_rate)
        noise *= np.sqrt(np.mean(clean**2) / np.mean(noise**2) / 100.0)

        def snr(x):
            return 10 * np.log10(np.sum(clean**2) / np.sum((x - clean) ** 2))

        y = Waveform.mono(clean + noise, sample_rate)
        snr_in = snr(y.channel(0))
        assert snr_in == pytest.approx(20.0)
        for _ in range(3):
            y = spectral_gate_refine(y, None, k)
        assert snr(y.channel(0)) > snr_in

    def test_iterative_refine_raises_snr(self, rng):
        sample_rate = 16000
        t = np.arange(sample_rate) / sample_rate
        clean = 0.5 * np.sin(2 * np.pi * 440.0 * t)
        noise = rng.standard_normal((2, sample_rate)) * np.sqrt(0.125 / 100.0)
        noisy = Waveform(clean + noise, sample_rate)
        out = iterative_refine(noisy, SpectralGateVocoder(), 3, 1, mel=SMALL_MEL)
        for ch in range(2):
            err_in = np.sum((noisy.channel(ch) - clean) ** 2)
            err_out = np.sum((out.channel(ch) - clean) ** 2)
            assert err_out < err_in

    def test_white_noise_attenuated(self, rng):
        noise = Waveform.mono(rng.standard_normal(16000) * 0.1, 16000)
        out = spectral_gate_refine(noise, None, 1)
        rms_in = np.sqrt(np.mean(noise.channel(0) ** 2))
        rms_out = np.sqrt(np.mean(out.channel(0) ** 2))
        assert rms_out < rms_in

    def test_silence_stays_silent(self):
        out = spectral_gate_refine(Waveform.mono(np.zeros(4096), 16000), None, 1)
        assert np.all(out.channel(0) == 0.0)

    def test_short_input_rejected(self):
        with pytest.raises(InvalidInputError):
            spectral_gate_refine(Waveform.mono(np.zeros(100), 16000), None, 1)

    def test_short_input_becomes_refinement_error(self):
        tiny = Waveform.stereo(np.zeros(100), np.zeros(100), 16000)
        with pytest.raises(RefinementError):
            iterative_refine(tiny, SpectralGateVocoder(), 1, 1, mel=SMALL_MEL)

    def test_preserves_dtype(self):
        x = Waveform.mono(np.zeros(2048, dtype=np.float32), 16000)
        assert spectral_gate_refine(x, None, 0).dtype == np.float32

    def test_invalid_attenuation(self):
        with pytest.raises(InvalidInputError):
            SpectralGateVocoder(attenuation=1.5)


class TestBuildVocoder:
    @pytest.mark.parametrize(
        ("selector", "cls"),
        [
            ("identity", IdentityVocoder),
            ("spectral-gate", SpectralGateVocoder),
            ("spectral_gate", SpectralGateVocoder),
            ("external:127.0.0.1:9555", ExternalVocoder),
        ],
    )
    def test_selectors(self, selector, cls):
        assert isinstance(build_vocoder(selector), cls)

    def test_external_endpoint_options(self):
        vocoder = build_vocoder("external:localhost:7000", timeout=2.5, connect_retries=0)
        assert vocoder.endpoint.host == "localhost"
        assert vocoder.endpoint.port == 7000
        assert vocoder.endpoint.timeout == 2.5

    def test_spectral_gate_uses_stft_config(self):
        vocoder = build_vocoder("spectral-gate", stft_cfg=StftConfig(fft_size=512, hop=128))
        assert vocoder.cfg.fft_size == 512

    @pytest.mark.parametrize("selector", ["neural", "external:", "external:host", "external:host:notaport"])
    def test_unknown(self, selector):
        with pytest.raises(InvalidInputError):
            build_vocoder(selector)

    def test_context_manager_closes(self):
        closed = []

        class Closing(IdentityVocoder):
            def close(self):
                closed.append(True)

        with Closing():
            pass
        assert closed == [True]

    def test_vocoder_error_hierarchy(self):
        assert issubclass(RefinementError, VocoderError)
