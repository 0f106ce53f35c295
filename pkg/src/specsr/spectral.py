"""STFT/iSTFT, complex-as-channels packing, and scaled analysis/synthesis pairs.

The frequency-domain upsampler hinges on one fact: analysing at rate R with
window f/s and hop r*f/s, then synthesising at rate s*R with window f and hop
r*f, keeps the spectrogram shape fixed while remapping bin k from frequency
k*R/f to k*s*R/f. Everything here exists to make that exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import torch

from .audio import WaveSignal

VALID_OVERLAP_RATIOS = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))


class ColaViolationError(ValueError):
    """The window/hop pair leaves overlap-add normalization ill-conditioned."""


@dataclass(frozen=True)
class StftConfig:
    fft_size: int
    win_length: int
    hop_length: int
    window: str = "hann"
    centered: bool = True

    def __post_init__(self):
        if self.fft_size % 2 != 0:
            raise ValueError(f"fft_size must be even, got {self.fft_size}")
        if not (1 <= self.hop_length <= self.win_length <= self.fft_size):
            raise ValueError(
                f"need 1 <= hop ({self.hop_length}) <= win ({self.win_length})"
                f" <= fft ({self.fft_size})"
            )
        if self.window not in ("hann", "rect"):
            raise ValueError(f"window must be 'hann' or 'rect', got {self.window!r}")

    @property
    def bins(self) -> int:
        return self.fft_size // 2 + 1

    def describe(self) -> str:
        return (
            f"fft={self.fft_size} win={self.win_length} hop={self.hop_length}"
            f" window={self.window} centered={self.centered}"
        )


@dataclass(frozen=True)
class SpectroTransformSpec:
    """Paired analysis/synthesis STFT configs realizing an upsampling scale."""

    scale: int
    fft_size: int
    overlap_ratio: Fraction
    analysis: StftConfig
    synthesis: StftConfig


@dataclass(frozen=True)
class ComplexSpectrogram:
    values: np.ndarray  # complex, (bins, frames)
    source_rate: int

    def __post_init__(self):
        values = np.asarray(self.values)
        if not np.iscomplexobj(values):
            values = values.astype(np.complex128)
        if values.ndim != 2:
            raise ValueError(f"expected (bins, frames) grid, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrogram contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def bins(self) -> int:
        return self.values.shape[0]

    @property
    def frames(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CacArray:
    """Real/imaginary channel packing of a complex spectrogram."""

    values: np.ndarray  # real, (2, bins, frames)
    source_rate: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3 or values.shape[0] != 2:
            raise ValueError(f"expected (2, bins, frames) grid, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def bins(self) -> int:
        return self.values.shape[1]

    @property
    def frames(self) -> int:
        return self.values.shape[2]


_WINDOW_CACHE: dict[tuple, torch.Tensor] = {}


def get_window(cfg: StftConfig, dtype=torch.float64, device="cpu") -> torch.Tensor:
    key = (cfg.window, cfg.win_length, dtype, str(device))
    w = _WINDOW_CACHE.get(key)
    if w is None:
        if cfg.window == "hann":
            w = torch.hann_window(cfg.win_length, periodic=True, dtype=dtype, device=device)
        else:
            w = torch.ones(cfg.win_length, dtype=dtype, device=device)
        _WINDOW_CACHE[key] = w
    return w


def expected_frames(cfg: StftConfig, length: int) -> int:
    """Frame count the analysis produces for a signal of `length` samples."""
    if cfg.centered:
        return length // cfg.hop_length + 1
    return (length - cfg.fft_size) // cfg.hop_length + 1


def ola_envelope(cfg: StftConfig, n_frames: int) -> np.ndarray:
    """Overlap-added squared window over the synthesis span (padded coordinates)."""
    w = get_window(cfg).numpy()
    pad_left = (cfg.fft_size - cfg.win_length) // 2
    frame = np.zeros(cfg.fft_size)
    frame[pad_left:pad_left + cfg.win_length] = w * w
    span = (n_frames - 1) * cfg.hop_length + cfg.fft_size
    env = np.zeros(span)
    for k in range(n_frames):
        env[k * cfg.hop_length:k * cfg.hop_length + cfg.fft_size] += frame
    return env


def check_cola(cfg: StftConfig, n_frames: int, out_length: int) -> None:
    """Reject configs whose OLA normalization denominator vanishes anywhere."""
    env = ola_envelope(cfg, n_frames)
    if cfg.centered:
        start = cfg.fft_size // 2
        region = env[start:start + out_length]
    else:
        region = env[:out_length]
    if region.size == 0 or region.min() < 1e-8:
        raise ColaViolationError(
            f"overlap-add normalization vanishes for config ({cfg.describe()})"
        )


def stft_tensor(x: torch.Tensor, cfg: StftConfig) -> torch.Tensor:
    """Batched STFT, (..., T) -> complex (..., bins, frames). Differentiable."""
    window = get_window(cfg, dtype=x.dtype, device=x.device)
    return torch.stft(
        x,
        n_fft=cfg.fft_size,
        hop_length=cfg.hop_length,
        win_length=cfg.win_length,
        window=window,
        center=cfg.centered,
        pad_mode="reflect",
        normalized=False,
        onesided=True,
        return_complex=True,
    )


def istft_tensor(S: torch.Tensor, cfg: StftConfig, out_length: int) -> torch.Tensor:
    """Batched inverse STFT with window-square OLA normalization. Differentiable."""
    real_dtype = torch.float64 if S.dtype == torch.complex128 else torch.float32
    window = get_window(cfg, dtype=real_dtype, device=S.device)
    return torch.istft(
        S,
        n_fft=cfg.fft_size,
        hop_length=cfg.hop_length,
        win_length=cfg.win_length,
        window=window,
        center=cfg.centered,
        normalized=False,
        onesided=True,
        length=out_length,
    )


def stft(x: WaveSignal, cfg: StftConfig) -> ComplexSpectrogram:
    """Analyze a waveform; bins = fft/2+1, frames = floor(len/hop)+1 when centered."""
    n = len(x)
    if not cfg.centered and cfg.win_length > n:
        raise ValueError(
            f"win_length {cfg.win_length} exceeds signal length {n} with centered=False"
        )
    if not cfg.centered and cfg.fft_size > n:
        raise ValueError(
            f"fft_size {cfg.fft_size} exceeds signal length {n} with centered=False"
        )
    if cfg.centered and n <= cfg.fft_size // 2:
        raise ValueError(
            f"centered analysis needs more than fft_size/2 = {cfg.fft_size // 2}"
            f" samples, got {n}"
        )
    xt = torch.from_numpy(x.samples)
    S = stft_tensor(xt, cfg)
    return ComplexSpectrogram(S.numpy(), x.sample_rate)


def istft(S: ComplexSpectrogram, cfg: StftConfig, out_length: int,
          sample_rate: int | None = None) -> WaveSignal:
    """Resynthesize `out_length` samples from a spectrogram.

    The frame count must match `out_length` within one frame; the output is
    trimmed or zero-padded to exactly `out_length`.
    """
    if S.bins != cfg.bins:
        raise ValueError(f"spectrogram has {S.bins} bins, config expects {cfg.bins}")
    if abs(expected_frames(cfg, out_length) - S.frames) > 1:
        raise ValueError(
            f"{S.frames} frames inconsistent with out_length {out_length}"
            f" (expected {expected_frames(cfg, out_length)} +- 1)"
        )
    check_cola(cfg, S.frames, out_length)
    St = torch.from_numpy(np.ascontiguousarray(S.values, dtype=np.complex128))
    y = istft_tensor(St, cfg, out_length).numpy()
    if y.shape[0] < out_length:
        y = np.pad(y, (0, out_length - y.shape[0]))
    return WaveSignal(y[:out_length], sample_rate or S.source_rate)


def _round_even_down(v: float) -> int:
    n = int(np.floor(v))
    return n if n % 2 == 0 else n - 1


def make_transform_pair(scale: int, fft_size: int,
                        overlap_ratio: Fraction | float) -> SpectroTransformSpec:
    """Build the analysis/synthesis config pair for upsampling by `scale`.

    Both sides share `fft_size`, so the intermediate spectrogram shape is the
    same; the synthesis window and hop are `scale` times the analysis ones
    (exactly when fft_size divides by scale, by the rounding rules otherwise).
    """
    r = Fraction(overlap_ratio).limit_denominator(64)
    if r not in VALID_OVERLAP_RATIOS:
        raise ValueError(f"overlap_ratio must be one of 1/2, 1/4, 1/8, got {overlap_ratio}")
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    if fft_size % 2 != 0:
        raise ValueError(f"fft_size must be even, got {fft_size}")
    ana_win = _round_even_down(fft_size / scale)
    if ana_win < 2:
        raise ValueError(f"fft_size/scale = {fft_size / scale:.2f} rounds below 2 samples")
    ana_hop = round(float(r) * fft_size / scale)
    syn_hop = round(float(r) * fft_size)
    analysis = StftConfig(fft_size=fft_size, win_length=ana_win, hop_length=ana_hop)
    synthesis = StftConfig(fft_size=fft_size, win_length=fft_size, hop_length=syn_hop)
    return SpectroTransformSpec(
        scale=scale, fft_size=fft_size, overlap_ratio=r,
        analysis=analysis, synthesis=synthesis,
    )


def complex_to_cac(S: ComplexSpectrogram, drop_nyquist: bool = False) -> CacArray:
    """Stack real and imaginary parts as two channels, optionally dropping
    the Nyquist row so the bin count divides by the encoder's stride product."""
    values = S.values
    if drop_nyquist:
        values = values[:-1, :]
    return CacArray(np.stack([values.real, values.imag]), S.source_rate)


def cac_to_complex(C: CacArray, restore_nyquist: bool = False) -> ComplexSpectrogram:
    """Inverse of complex_to_cac; a dropped Nyquist row is reinstated as zeros."""
    if C.values.shape[0] != 2:
        raise ValueError(f"expected 2 channels, got {C.values.shape[0]}")
    values = C.values[0] + 1j * C.values[1]
    if restore_nyquist:
        values = np.concatenate([values, np.zeros((1, values.shape[1]))], axis=0)
    return ComplexSpectrogram(values, C.source_rate)
