"""STFT/iSTFT and transform-pair contracts, checked against direct DFT oracles."""
import numpy as np
import pytest

from specsr.audio import WaveSignal
from specsr.spectral import (
    CacArray,
    ColaViolationError,
    ComplexSpectrogram,
    StftConfig,
    cac_to_complex,
    complex_to_cac,
    expected_frames,
    istft,
    make_transform_pair,
    stft,
)


def dft_onesided(frame: np.ndarray) -> np.ndarray:
    """Direct O(N^2) DFT evaluation, independent of any FFT library."""
    n = len(frame)
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    return (frame[None, :] * np.exp(-2j * np.pi * k * t / n)).sum(axis=1)


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestStft:
    def test_constant_signal_single_frame(self):
        x = WaveSignal(np.ones(8), 8)
        cfg = StftConfig(fft_size=8, win_length=8, hop_length=8, window="rect", centered=False)
        S = stft(x, cfg)
        assert S.bins == 5 and S.frames == 1
        assert S.values[0, 0] == pytest.approx(8 + 0j)
        assert np.allclose(S.values[1:, 0], 0, atol=1e-12)

    def test_cosine_matches_direct_dft(self):
        n = np.arange(8)
        x = np.cos(2 * np.pi * 2 * n / 8)
        cfg = StftConfig(fft_size=8, win_length=8, hop_length=8, window="rect", centered=False)
        S = stft(WaveSignal(x, 8), cfg)
        expected = dft_onesided(x)
        assert np.allclose(S.values[:, 0], expected, atol=1e-12)
        assert abs(S.values[2, 0]) == pytest.approx(4.0)

    def test_centered_frame_count(self):
        x = WaveSignal(np.random.default_rng(0).standard_normal(8192), 16000)
        cfg = StftConfig(fft_size=512, win_length=512, hop_length=64)
        S = stft(x, cfg)
        assert S.frames == 8192 // 64 + 1 == 129
        assert S.frames == expected_frames(cfg, 8192)

    def test_nonfinite_input_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            WaveSignal(np.array([1.0, np.nan]), 8000)

    def test_window_longer_than_signal_rejected(self):
        cfg = StftConfig(fft_size=16, win_length=16, hop_length=8, centered=False)
        with pytest.raises(ValueError, match="exceeds signal length"):
            stft(WaveSignal(np.ones(8), 8000), cfg)

    def test_linearity(self):
        rng = np.random.default_rng(1)
        x, z = rng.standard_normal(2048), rng.standard_normal(2048)
        cfg = StftConfig(fft_size=256, win_length=256, hop_length=64)
        lhs = stft(WaveSignal(3.0 * x - 0.5 * z, 8000), cfg).values
        rhs = 3.0 * stft(WaveSignal(x, 8000), cfg).values - 0.5 * stft(WaveSignal(z, 8000), cfg).values
        assert rel_l2(lhs, rhs) < 1e-9

    def test_parseval_rect_no_overlap(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(1024)
        cfg = StftConfig(fft_size=256, win_length=256, hop_length=256, window="rect", centered=False)
        S = stft(WaveSignal(x, 8000), cfg).values
        # onesided spectrum: interior bins count twice
        power = np.abs(S[0]) ** 2 + np.abs(S[-1]) ** 2 + 2 * (np.abs(S[1:-1]) ** 2).sum(axis=0)
        assert rel_l2(power.sum() / 256, (x ** 2).sum()) < 1e-6


class TestIstft:
    @pytest.mark.parametrize("hop_div", [2, 4, 8])
    def test_round_trip(self, hop_div):
        rng = np.random.default_rng(hop_div)
        x = WaveSignal(rng.standard_normal(8000), 8000)
        cfg = StftConfig(fft_size=512, win_length=512, hop_length=512 // hop_div)
        y = istft(stft(x, cfg), cfg, len(x))
        assert rel_l2(y.samples, x.samples) < 1e-6
        assert y.sample_rate == 8000

    def test_zero_spectrogram(self):
        cfg = StftConfig(fft_size=256, win_length=256, hop_length=64)
        S = ComplexSpectrogram(np.zeros((129, 17), dtype=complex), 8000)
        y = istft(S, cfg, 1024)
        assert len(y) == 1024
        assert np.all(y.samples == 0)

    def test_cola_violation_named(self):
        cfg = StftConfig(fft_size=512, win_length=512, hop_length=512, window="hann")
        S = ComplexSpectrogram(np.zeros((257, 5), dtype=complex), 8000)
        with pytest.raises(ColaViolationError, match="fft=512 win=512 hop=512"):
            istft(S, cfg, 4 * 512)

    def test_frame_count_mismatch_rejected(self):
        cfg = StftConfig(fft_size=256, win_length=256, hop_length=64)
        S = ComplexSpectrogram(np.zeros((129, 5), dtype=complex), 8000)
        with pytest.raises(ValueError, match="inconsistent"):
            istft(S, cfg, 4096)

    @pytest.mark.parametrize("length", [1600, 8192, 44100])
    @pytest.mark.parametrize("hop_div", [2, 4, 8])
    def test_perfect_reconstruction_grid(self, length, hop_div):
        rng = np.random.default_rng(length + hop_div)
        x = WaveSignal(rng.standard_normal(length), 16000)
        cfg = StftConfig(fft_size=512, win_length=512, hop_length=512 // hop_div)
        y = istft(stft(x, cfg), cfg, length)
        assert rel_l2(y.samples, x.samples) < 1e-6


class TestTransformPair:
    def test_scale2_fft512(self):
        spec = make_transform_pair(2, 512, 1 / 4)
        assert (spec.analysis.fft_size, spec.analysis.win_length, spec.analysis.hop_length) == (512, 256, 64)
        assert (spec.synthesis.fft_size, spec.synthesis.win_length, spec.synthesis.hop_length) == (512, 512, 128)

    def test_scale4_fft1024(self):
        spec = make_transform_pair(4, 1024, 1 / 4)
        assert (spec.analysis.win_length, spec.analysis.hop_length) == (256, 64)
        assert (spec.synthesis.win_length, spec.synthesis.hop_length) == (1024, 256)

    def test_identity_scale(self):
        spec = make_transform_pair(1, 512, 1 / 2)
        assert spec.analysis == spec.synthesis

    def test_window_collapse_rejected(self):
        with pytest.raises(ValueError, match="below 2 samples"):
            make_transform_pair(512, 512, 1 / 2)

    def test_bad_ratio_rejected(self):
        with pytest.raises(ValueError, match="overlap_ratio"):
            make_transform_pair(2, 512, 1 / 3)

    @pytest.mark.parametrize("scale,fft", [(2, 512), (4, 512), (4, 1024), (3, 1536)])
    def test_frame_count_equality(self, scale, fft):
        # load-bearing fact: both sides see the same spectrogram shape
        spec = make_transform_pair(scale, fft, 1 / 4)
        length = 4000
        n_analysis = expected_frames(spec.analysis, length)
        n_synthesis = expected_frames(spec.synthesis, scale * length)
        assert n_analysis == n_synthesis


class TestCac:
    def test_nyquist_drop_shape(self):
        S = ComplexSpectrogram(np.random.default_rng(3).standard_normal((257, 10))
                               + 1j * np.random.default_rng(4).standard_normal((257, 10)), 16000)
        C = complex_to_cac(S, drop_nyquist=True)
        assert C.values.shape == (2, 256, 10)

    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(5)
        S = ComplexSpectrogram(rng.standard_normal((129, 7)) + 1j * rng.standard_normal((129, 7)), 8000)
        back = cac_to_complex(complex_to_cac(S))
        assert np.array_equal(back.values, S.values)

    def test_round_trip_with_nyquist_restore(self):
        rng = np.random.default_rng(6)
        S = ComplexSpectrogram(rng.standard_normal((129, 7)) + 1j * rng.standard_normal((129, 7)), 8000)
        back = cac_to_complex(complex_to_cac(S, drop_nyquist=True), restore_nyquist=True)
        assert np.array_equal(back.values[:-1], S.values[:-1])
        assert np.all(back.values[-1] == 0)

    def test_wrong_channel_count_rejected(self):
        with pytest.raises(ValueError):
            CacArray(np.zeros((3, 4, 5)), 8000)

    def test_real_signal_dc_imag_zero(self):
        x = WaveSignal(np.random.default_rng(7).standard_normal(2048), 8000)
        cfg = StftConfig(fft_size=256, win_length=256, hop_length=64)
        C = complex_to_cac(stft(x, cfg))
        assert np.allclose(C.values[1, 0, :], 0, atol=1e-12)
