"""INI experiment configs: presets, file loading, and dotted-key overrides."""
from __future__ import annotations

import configparser
import difflib
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .data import PairSpec
from .losses import LossWeights
from .model import ModelConfig
from .msd import DiscriminatorConfig
from .train import TrainConfig


@dataclass(frozen=True)
class RunConfig:
    """Everything one experiment setting needs: the rate pair plus training."""

    pair: PairSpec
    train: TrainConfig

    def __post_init__(self):
        if self.train.scale != self.pair.scale:
            raise ValueError(
                f"transform scale {self.train.scale} != rate pair scale {self.pair.scale}")


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_ratio(raw: str) -> float:
    return float(Fraction(raw.strip()))


# "section.key" -> coercion; this is the whole legal surface of a config file
SCHEMA: dict[str, type | object] = {
    "data.source_rate": int,
    "data.target_rate": int,
    "data.chunk_seconds": float,
    "data.chunk_hop_seconds": float,
    "transform.fft_size": int,
    "transform.overlap_ratio": _parse_ratio,
    "train.total_steps": int,
    "train.batch_size": int,
    "train.lr_g": float,
    "train.lr_d": float,
    "train.grad_clip": float,
    "train.seed": int,
    "train.device": str,
    "train.log_every": int,
    "train.ckpt_every": int,
    "train.disc_update_every": int,
    "loss.lambda_spectral": float,
    "loss.lambda_adv": float,
    "loss.lambda_feat": float,
    "loss.adv_formulation": str,
    "discriminator.num_discriminators": int,
    "model.base_channels": int,
    "model.kernel_size": int,
    "model.attention_window": int,
    "model.attention_heads": int,
    "model.lstm_layers": int,
    "model.use_ftb": _parse_bool,
    "model.activation": str,
    "model.snake_alpha_init": float,
}


class UnknownConfigKeyError(ValueError):
    def __init__(self, key: str):
        close = difflib.get_close_matches(key, SCHEMA.keys(), n=1)
        hint = f"; did you mean {close[0]!r}?" if close else ""
        super().__init__(f"unknown config key {key!r}{hint}")


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    """Parse 'section.key=value' strings, rejecting unknown keys."""
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form section.key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in SCHEMA:
            raise UnknownConfigKeyError(key)
        out[key] = value.strip()
    return out


def _read_ini(path: Path) -> dict[str, str]:
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    flat = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            full = f"{section}.{key}"
            if full not in SCHEMA:
                raise UnknownConfigKeyError(full)
            flat[full] = value
    return flat


def preset_path(name: str) -> Path:
    candidate = resources.files("specsr").joinpath("presets", f"{name}.ini")
    with resources.as_file(candidate) as path:
        if not path.exists():
            available = sorted(p.stem for p in path.parent.glob("*.ini"))
            raise FileNotFoundError(
                f"no preset {name!r}; available: {', '.join(available)}")
        return Path(path)


def available_presets() -> list[str]:
    with resources.as_file(resources.files("specsr").joinpath("presets")) as path:
        return sorted(p.stem for p in Path(path).glob("*.ini"))


def load_run_config(source: str | Path, overrides: list[str] | None = None) -> RunConfig:
    """Load a preset name or .ini path, then apply key=value overrides."""
    path = Path(source)
    if not path.exists():
        path = preset_path(str(source))
    flat = _read_ini(path)
    flat.update(parse_overrides(overrides or []))

    def value(key: str, default):
        if key not in flat:
            return default
        return SCHEMA[key](flat[key])

    pair = PairSpec(source_rate=value("data.source_rate", 8000),
                    target_rate=value("data.target_rate", 16000))
    fft_size = value("transform.fft_size", 512)
    weights = LossWeights(
        lambda_spectral=value("loss.lambda_spectral", 1.0),
        lambda_adv=value("loss.lambda_adv", 1.0),
        lambda_feat=value("loss.lambda_feat", 10.0),
    )
    disc = DiscriminatorConfig(
        num_discriminators=value("discriminator.num_discriminators", 3))
    model = ModelConfig(
        base_channels=value("model.base_channels", 48),
        kernel_size=value("model.kernel_size", 8),
        bins=fft_size // 2,
        attention_window=value("model.attention_window", 100),
        attention_heads=value("model.attention_heads", 4),
        lstm_layers=value("model.lstm_layers", 2),
        use_ftb=value("model.use_ftb", True),
        activation=value("model.activation", "snake"),
        snake_alpha_init=value("model.snake_alpha_init", 1.0),
    )
    train = TrainConfig(
        scale=pair.scale,
        fft_size=fft_size,
        overlap_ratio=value("transform.overlap_ratio", 0.25),
        total_steps=value("train.total_steps", 2000),
        batch_size=value("train.batch_size", 16),
        lr_g=value("train.lr_g", 3e-4),
        lr_d=value("train.lr_d", 3e-4),
        grad_clip=value("train.grad_clip", 5.0),
        seed=value("train.seed", 0),
        device=value("train.device", "cpu"),
        log_every=value("train.log_every", 10),
        ckpt_every=value("train.ckpt_every", 500),
        disc_update_every=value("train.disc_update_every", 1),
        adv_formulation=value("loss.adv_formulation", "hinge"),
        chunk_seconds=value("data.chunk_seconds", 0.5),
        chunk_hop_seconds=value("data.chunk_hop_seconds", 0.25),
        weights=weights,
        disc=disc,
        model=model,
    )
    return RunConfig(pair=pair, train=train)


def with_seed(config: RunConfig, seed: int | None) -> RunConfig:
    if seed is None:
        return config
    return replace(config, train=replace(config.train, seed=seed))
