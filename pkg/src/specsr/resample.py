"""Polyphase sinc resampling and low-pass filtering."""
from __future__ import annotations

import math

import numpy as np
from scipy import signal as sps

from .audio import WaveSignal

# 64 taps per polyphase branch; beta matches the usual "kaiser best" design.
_TAPS_PER_PHASE = 64
_KAISER_BETA = 14.769656459379492


def sinc_resample(x: WaveSignal, target_rate: int) -> WaveSignal:
    """Resample with a Kaiser-windowed sinc polyphase filter.

    Output length is round(len(x) * target / source). The filter cuts off at
    the lower of the two Nyquist frequencies, so upsampling adds no content
    above the input Nyquist.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == x.sample_rate:
        return x
    g = math.gcd(x.sample_rate, int(target_rate))
    up, down = int(target_rate) // g, x.sample_rate // g
    max_rate = max(up, down)
    half_len = (_TAPS_PER_PHASE // 2) * max_rate
    h = sps.firwin(2 * half_len + 1, 1.0 / max_rate, window=("kaiser", _KAISER_BETA))
    y = sps.resample_poly(x.samples, up, down, window=h)
    n_out = round(len(x) * target_rate / x.sample_rate)
    if y.shape[0] < n_out:
        y = np.pad(y, (0, n_out - y.shape[0]))
    return WaveSignal(y[:n_out], int(target_rate))


def lowpass_filter(x: WaveSignal, cutoff: float) -> WaveSignal:
    """Zero-phase FIR low-pass: < 0.5 dB ripple below 0.8*cutoff, >= 40 dB
    attenuation above 1.2*cutoff."""
    nyq = x.nyquist
    if not 0 < cutoff < nyq:
        raise ValueError(f"cutoff must lie in (0, {nyq}), got {cutoff}")
    # Kaiser design over the 0.85..1.15*cutoff transition band, 60 dB stopband.
    width = 0.3 * cutoff / nyq
    numtaps, beta = sps.kaiserord(60.0, width)
    numtaps |= 1  # symmetric (odd) for exact linear phase
    h = sps.firwin(numtaps, cutoff / nyq, window=("kaiser", beta))
    pad = numtaps // 2
    padded = np.pad(x.samples, pad, mode="reflect" if len(x) > pad else "constant")
    y = np.convolve(padded, h, mode="same")[pad:pad + len(x)]
    return x.with_samples(y)
