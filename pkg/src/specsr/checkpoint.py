"""Binary checkpoint container: versioned header, atomic writes, and
forward-compatible tolerance of unknown keys."""
from __future__ import annotations

import os
import tempfile
import warnings
from pathlib import Path

import torch

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_container(payload: dict, path: str | Path) -> None:
    """Write a payload dict atomically (temp file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    record = {"format_version": FORMAT_VERSION, **payload}
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            torch.save(record, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_container(path: str | Path, known_keys: set[str] | None = None) -> dict:
    """Read a container; partial/corrupt files and version mismatches raise
    CheckpointError, unknown keys are dropped with a warning."""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint {path} does not exist")
    try:
        record = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise CheckpointError(f"checkpoint {path} is unreadable or truncated: {exc}") from exc
    if not isinstance(record, dict) or "format_version" not in record:
        raise CheckpointError(f"checkpoint {path} lacks a format-version header")
    version = record.pop("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has format version {version}, expected {FORMAT_VERSION}"
        )
    if known_keys is not None:
        unknown = set(record) - known_keys
        for key in sorted(unknown):
            warnings.warn(f"checkpoint {path}: ignoring unknown key {key!r}")
            record.pop(key)
    return record
