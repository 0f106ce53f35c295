"""Objective evaluation: log-spectral distance, the ViSQOL client, and
test-set aggregation."""
from __future__ import annotations

import csv
import re
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import WaveSignal, write_wav
from .resample import sinc_resample
from .spectral import StftConfig, stft

POWER_FLOOR = 1e-10


class MetricUnavailableError(RuntimeError):
    """The external metric tool is not present; never silently report zero."""


@dataclass(frozen=True)
class LsdConfig:
    fft_size: int = 2048
    hop_length: int = 512
    window: str = "hann"

    def stft_config(self) -> StftConfig:
        return StftConfig(fft_size=self.fft_size, win_length=self.fft_size,
                          hop_length=self.hop_length, window=self.window)


def _log_power(x: WaveSignal, cfg: LsdConfig) -> np.ndarray:
    S = stft(x, cfg.stft_config())
    power = np.abs(S.values) ** 2
    return np.log10(np.maximum(power, POWER_FLOOR))


def lsd(y: WaveSignal, yhat: WaveSignal, cfg: LsdConfig = LsdConfig(),
        band_hz: tuple[float, float] | None = None) -> float:
    """Log-spectral distance: per-frame RMS over bins of the log10-power
    difference, averaged over frames. Optionally restricted to a frequency band."""
    if len(y) != len(yhat) or y.sample_rate != yhat.sample_rate:
        raise ValueError(
            f"length/rate mismatch: {len(y)}@{y.sample_rate} vs {len(yhat)}@{yhat.sample_rate}")
    if len(y) < cfg.fft_size:
        raise ValueError(f"signals must span at least one {cfg.fft_size}-sample window")
    ly = _log_power(y, cfg)
    lh = _log_power(yhat, cfg)
    if band_hz is not None:
        freqs = np.arange(ly.shape[0]) * y.sample_rate / cfg.fft_size
        keep = (freqs >= band_hz[0]) & (freqs < band_hz[1])
        ly, lh = ly[keep], lh[keep]
    per_frame = np.sqrt(np.mean((lh - ly) ** 2, axis=0))
    return float(per_frame.mean())


_MOS_RE = re.compile(r"MOS-LQO:\s*([0-9.]+)")


def visqol_score(ref: WaveSignal, deg: WaveSignal, mode: str,
                 binary_path: str | Path) -> float:
    """Run the external ViSQOL client and parse its MOS-LQO output.

    Speech mode compares at 16 kHz, audio mode at 48 kHz; inputs are resampled
    accordingly before invocation.
    """
    if mode not in ("speech", "audio"):
        raise ValueError(f"mode must be 'speech' or 'audio', got {mode!r}")
    binary = Path(binary_path) if binary_path else None
    if binary is None or not binary.exists():
        raise MetricUnavailableError(
            f"ViSQOL binary not found at {binary_path!r}; metric unavailable")
    rate = 16000 if mode == "speech" else 48000
    ref = sinc_resample(ref, rate)
    deg = sinc_resample(deg, rate)
    with tempfile.TemporaryDirectory() as tmp:
        ref_path = Path(tmp) / "ref.wav"
        deg_path = Path(tmp) / "deg.wav"
        write_wav(ref_path, ref, subtype="pcm16")
        write_wav(deg_path, deg, subtype="pcm16")
        cmd = [str(binary), "--reference_file", str(ref_path),
               "--degraded_file", str(deg_path)]
        if mode == "speech":
            cmd.append("--use_speech_mode")
        proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"ViSQOL exited with {proc.returncode}:\n{proc.stdout}\n{proc.stderr}")
    match = _MOS_RE.search(proc.stdout)
    if not match:
        raise RuntimeError(f"could not parse MOS-LQO from ViSQOL output:\n{proc.stdout}")
    return float(match.group(1))


@dataclass(frozen=True)
class EvalRow:
    name: str
    lsd: float | None = None
    visqol: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class EvalResult:
    rows: tuple[EvalRow, ...]
    mean_lsd: float | None
    mean_visqol: float | None
    count: int  # files that evaluated successfully


def evaluate_testset(upsample, pairs, metrics=("lsd",), mode: str = "speech",
                     visqol_binary: str | Path | None = None,
                     lsd_config: LsdConfig = LsdConfig()) -> EvalResult:
    """Evaluate `upsample(lr) -> hr_estimate` over (name, lr, hr) triples.

    Per-file failures are recorded on their rows; aggregates are means over
    the successful files, with the success count disclosed.
    """
    pairs = sorted(pairs, key=lambda item: item[0])
    if not pairs:
        raise ValueError("no evaluation pairs given")
    rows = []
    for name, lr_sig, hr_sig in pairs:
        try:
            estimate = upsample(lr_sig)
            row = EvalRow(
                name=name,
                lsd=lsd(hr_sig, estimate, lsd_config) if "lsd" in metrics else None,
                visqol=(visqol_score(hr_sig, estimate, mode, visqol_binary)
                        if "visqol" in metrics else None),
            )
        except Exception as exc:
            row = EvalRow(name=name, error=str(exc))
        rows.append(row)
    ok = [r for r in rows if r.error is None]
    lsds = [r.lsd for r in ok if r.lsd is not None]
    visqols = [r.visqol for r in ok if r.visqol is not None]
    return EvalResult(
        rows=tuple(rows),
        mean_lsd=float(np.mean(lsds)) if lsds else None,
        mean_visqol=float(np.mean(visqols)) if visqols else None,
        count=len(ok),
    )


def write_results_csv(result: EvalResult, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "lsd", "visqol", "error"])
        for row in result.rows:
            writer.writerow([row.name,
                             "" if row.lsd is None else f"{row.lsd:.6f}",
                             "" if row.visqol is None else f"{row.visqol:.4f}",
                             row.error or ""])
        writer.writerow([])
        writer.writerow(["mean",
                         "" if result.mean_lsd is None else f"{result.mean_lsd:.6f}",
                         "" if result.mean_visqol is None else f"{result.mean_visqol:.4f}",
                         f"n={result.count}"])


def format_results_table(result: EvalResult) -> str:
    headers = ("file", "LSD", "ViSQOL")
    body = []
    for row in result.rows:
        if row.error:
            body.append((row.name, "error", row.error[:40]))
        else:
            body.append((row.name,
                         "-" if row.lsd is None else f"{row.lsd:.3f}",
                         "-" if row.visqol is None else f"{row.visqol:.3f}"))
    body.append(("mean ({} ok)".format(result.count),
                 "-" if result.mean_lsd is None else f"{result.mean_lsd:.3f}",
                 "-" if result.mean_visqol is None else f"{result.mean_visqol:.3f}"))
    widths = [max(len(str(line[i])) for line in [headers] + body) for i in range(3)]
    lines = ["  ".join(str(v).ljust(w) for v, w in zip(line, widths))
             for line in [headers] + body]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines)
