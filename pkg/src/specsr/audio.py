"""Time-domain signal container and RIFF/WAVE I/O."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile


@dataclass(frozen=True)
class WaveSignal:
    """A mono waveform with its sample rate.

    Samples are float64 in nominal range [-1, 1]; the constructor rejects
    empty, non-finite, or zero-rate inputs.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"expected mono 1-D samples, got shape {samples.shape}")
        if samples.size < 1:
            raise ValueError("signal must contain at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def nyquist(self) -> float:
        return self.sample_rate / 2.0

    def with_samples(self, samples: np.ndarray) -> "WaveSignal":
        return WaveSignal(samples, self.sample_rate)


def read_wav(path: str | Path) -> WaveSignal:
    """Read a RIFF/WAVE file (16-bit PCM or 32-bit float, any rate).

    Multichannel input is downmixed to mono by averaging, with a warning.
    """
    rate, data = wavfile.read(str(path))
    if data.ndim == 2:
        warnings.warn(f"{path}: {data.shape[1]} channels downmixed to mono by averaging")
        data = data.astype(np.float64).mean(axis=1)
    if data.dtype == np.int16:
        data = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        data = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        data = (data.astype(np.float64) - 128.0) / 128.0
    else:
        data = data.astype(np.float64)
    return WaveSignal(data, rate)


def write_wav(path: str | Path, signal: WaveSignal, subtype: str = "float32") -> None:
    """Write a mono WAV file as 32-bit float (default) or 16-bit PCM."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if subtype == "float32":
        wavfile.write(str(path), signal.sample_rate, signal.samples.astype(np.float32))
    elif subtype == "pcm16":
        clipped = np.clip(signal.samples, -1.0, 1.0)
        wavfile.write(str(path), signal.sample_rate, (clipped * 32767.0).astype(np.int16))
    else:
        raise ValueError(f"unsupported subtype {subtype!r} (use 'float32' or 'pcm16')")
