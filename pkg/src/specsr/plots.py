"""Figure rendering: spectrogram images and evaluation summaries."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .audio import WaveSignal
from .metrics import EvalResult
from .spectral import ComplexSpectrogram, StftConfig, stft

DB_FLOOR = -100.0


def _to_db(S: ComplexSpectrogram) -> np.ndarray:
    power = np.abs(S.values) ** 2
    return 10.0 * np.log10(np.maximum(power, 10 ** (DB_FLOOR / 10)))


def render_spectrogram_image(source: WaveSignal | ComplexSpectrogram,
                             path: str | Path,
                             fft_size: int = 1024, hop_length: int = 256,
                             title: str | None = None) -> Path:
    """Write a log-magnitude (dB) spectrogram PNG, frequency axis up to Nyquist."""
    if isinstance(source, WaveSignal):
        cfg = StftConfig(fft_size=fft_size, win_length=fft_size, hop_length=hop_length)
        S = stft(source, cfg)
        duration = source.duration
    else:
        S = source
        cfg = None
        duration = S.frames  # frame index axis when hop is unknown
    db = _to_db(S)
    nyquist = S.source_rate / 2.0

    fig, ax = plt.subplots(figsize=(7, 4))
    img = ax.imshow(db, origin="lower", aspect="auto",
                    extent=(0.0, duration, 0.0, nyquist / 1000.0),
                    cmap="magma", vmin=DB_FLOOR, vmax=db.max() if db.size else 0.0)
    ax.set_xlabel("time [s]" if cfg is not None else "frame")
    ax.set_ylabel("frequency [kHz]")
    if title:
        ax.set_title(title)
    fig.colorbar(img, ax=ax, label="power [dB]")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def render_eval_figure(result: EvalResult, path: str | Path) -> Path:
    """Per-file LSD bars with the aggregate as a reference line."""
    ok = [r for r in result.rows if r.error is None and r.lsd is not None]
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(ok) + 2), 4))
    if ok:
        names = [r.name for r in ok]
        values = [r.lsd for r in ok]
        ax.bar(range(len(ok)), values, color="#4878a8")
        ax.set_xticks(range(len(ok)))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
        if result.mean_lsd is not None:
            ax.axhline(result.mean_lsd, color="#b04030", linestyle="--",
                       label=f"mean {result.mean_lsd:.3f}")
            ax.legend()
    ax.set_ylabel("LSD")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
