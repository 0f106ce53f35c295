"""Corpus ingestion: manifests, VCTK split rules, LR/HR pair manufacture,
and fixed-length training chunks."""
from __future__ import annotations

import json
import logging
import re
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .audio import WaveSignal, read_wav, write_wav
from .resample import sinc_resample

log = logging.getLogger(__name__)

_SPEAKER_RE = re.compile(r"(p\d{3})")
_MIC_RE = re.compile(r"(mic\d+)")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    duration_samples: int
    sample_rate: int
    speaker_id: str | None = None
    mic_id: str | None = None


@dataclass(frozen=True)
class PairSpec:
    """A source/target rate pair; scale is the integer upsampling factor."""

    source_rate: int
    target_rate: int

    def __post_init__(self):
        if self.source_rate <= 0 or self.target_rate <= 0:
            raise ValueError("rates must be positive")
        if self.target_rate % self.source_rate != 0:
            raise ValueError(
                f"target rate {self.target_rate} not an integer multiple of"
                f" source rate {self.source_rate}"
            )

    @property
    def scale(self) -> int:
        return self.target_rate // self.source_rate


@dataclass(frozen=True)
class TrainChunk:
    lr: WaveSignal
    hr: WaveSignal
    offset: int  # hr-side sample offset within the file

    def __post_init__(self):
        scale = self.hr.sample_rate // self.lr.sample_rate
        if len(self.hr) != scale * len(self.lr):
            raise ValueError(
                f"hr length {len(self.hr)} != scale {scale} * lr length {len(self.lr)}"
            )


def build_manifest(root_dir: str | Path, pattern: str = "**/*.wav") -> list[ManifestEntry]:
    """Scan a directory tree; unreadable files are skipped with a warning."""
    root = Path(root_dir)
    entries = []
    skipped = 0
    for path in sorted(root.glob(pattern)):
        if not path.is_file():
            continue
        try:
            sig = read_wav(path)
        except Exception as exc:
            skipped += 1
            warnings.warn(f"skipping unreadable file {path}: {exc}")
            continue
        name = path.name
        speaker = _SPEAKER_RE.search(name)
        mic = _MIC_RE.search(name)
        entries.append(ManifestEntry(
            path=str(path),
            duration_samples=len(sig),
            sample_rate=sig.sample_rate,
            speaker_id=speaker.group(1) if speaker else None,
            mic_id=mic.group(1) if mic else None,
        ))
    if skipped:
        log.info("manifest: %d files skipped as unreadable", skipped)
    return entries


def write_manifest(entries: list[ManifestEntry], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(asdict(entry)) + "\n")


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(ManifestEntry(**json.loads(line)))
    return entries


OMITTED_SPEAKERS = ("p280", "p315")
TRAIN_SPEAKERS = 100
TEST_SPEAKERS = 8


def split_vctk(entries: list[ManifestEntry]) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    """VCTK protocol: drop p280/p315 and everything but mic1, then the first
    100 speakers (sorted by id) train and the remaining 8 test."""
    kept = [e for e in entries
            if e.speaker_id not in OMITTED_SPEAKERS and e.mic_id == "mic1"]
    speakers = sorted({e.speaker_id for e in kept if e.speaker_id is not None})
    if len(speakers) < TRAIN_SPEAKERS + TEST_SPEAKERS:
        raise ValueError(
            f"need at least {TRAIN_SPEAKERS + TEST_SPEAKERS} speakers after"
            f" omissions, found {len(speakers)}"
        )
    train_ids = set(speakers[:TRAIN_SPEAKERS])
    test_ids = set(speakers[TRAIN_SPEAKERS:TRAIN_SPEAKERS + TEST_SPEAKERS])
    train = [e for e in kept if e.speaker_id in train_ids]
    test = [e for e in kept if e.speaker_id in test_ids]
    return train, test


def make_lr_hr_pair(y: WaveSignal, pair: PairSpec,
                    min_samples: int = 256) -> tuple[WaveSignal, WaveSignal]:
    """Downsample the high-resolution signal and trim it so the lengths obey
    len(hr) = scale * len(lr) exactly."""
    if y.sample_rate != pair.target_rate:
        raise ValueError(f"signal rate {y.sample_rate} != pair target {pair.target_rate}")
    if len(y) < min_samples:
        raise ValueError(f"signal of {len(y)} samples is shorter than one analysis window")
    x = sinc_resample(y, pair.source_rate)
    hr_len = pair.scale * len(x)
    samples = y.samples
    if hr_len > len(y):
        samples = np.pad(samples, (0, hr_len - len(y)))
    return x, WaveSignal(samples[:hr_len], y.sample_rate)


def cache_lr_path(cache_root: str | Path, source_rate: int, rel_path: str | Path) -> Path:
    return Path(cache_root) / f"lr_{source_rate}" / Path(rel_path)


def build_lr_cache(entries: list[ManifestEntry], data_root: str | Path,
                   cache_root: str | Path, pair: PairSpec) -> list[tuple[Path, Path]]:
    """Materialize downsampled copies on disk; returns (lr, hr) path pairs."""
    data_root = Path(data_root)
    produced = []
    for entry in entries:
        hr_path = Path(entry.path)
        rel = hr_path.relative_to(data_root) if hr_path.is_relative_to(data_root) else hr_path.name
        lr_path = cache_lr_path(cache_root, pair.source_rate, rel)
        if not lr_path.exists():
            hr = read_wav(hr_path)
            lr, _ = make_lr_hr_pair(hr, pair)
            write_wav(lr_path, lr)
        produced.append((lr_path, hr_path))
    return produced


def chunk_stream(pairs: list[tuple[WaveSignal, WaveSignal]], chunk_seconds: float,
                 hop_seconds: float, seed: int):
    """Yield aligned fixed-length chunks in a seed-shuffled deterministic order.

    hr offsets are always scale * lr offsets, so chunk pairs stay time-aligned.
    """
    positions = []
    for idx, (lr, hr) in enumerate(pairs):
        scale = hr.sample_rate // lr.sample_rate
        lr_chunk = int(round(chunk_seconds * lr.sample_rate))
        lr_hop = max(int(round(hop_seconds * lr.sample_rate)), 1)
        if lr_chunk > len(lr):
            raise ValueError(
                f"chunk of {chunk_seconds}s exceeds file of {len(lr)} lr samples")
        for start in range(0, len(lr) - lr_chunk + 1, lr_hop):
            positions.append((idx, start, lr_chunk, scale))
    rng = np.random.default_rng(seed)
    rng.shuffle(positions)
    for idx, start, lr_chunk, scale in positions:
        lr, hr = pairs[idx]
        yield TrainChunk(
            lr=WaveSignal(lr.samples[start:start + lr_chunk], lr.sample_rate),
            hr=WaveSignal(hr.samples[scale * start:scale * (start + lr_chunk)],
                          hr.sample_rate),
            offset=scale * start,
        )
