"""Optimization loop coupling the generator, discriminators, and losses."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from .checkpoint import CheckpointError, load_container, save_container
from .data import TrainChunk
from .inference import forward_waveform
from .losses import LossReport, LossWeights, discriminator_loss, generator_objective
from .model import (
    ModelConfig,
    ParameterSet,
    SpectralUNet,
    load_into_module,
    params_from_module,
)
from .msd import DiscriminatorConfig, MultiScaleDiscriminator
from .spectral import SpectroTransformSpec, make_transform_pair


@dataclass(frozen=True)
class TrainConfig:
    scale: int = 2
    fft_size: int = 512
    overlap_ratio: float = 0.25
    total_steps: int = 2000  # paper-scale runs use 500_000
    batch_size: int = 16
    lr_g: float = 3e-4
    lr_d: float = 3e-4
    betas: tuple[float, float] = (0.9, 0.999)
    grad_clip: float = 5.0
    seed: int = 0
    device: str = "cpu"
    log_every: int = 10
    ckpt_every: int = 500
    disc_update_every: int = 1
    adv_formulation: str = "hinge"
    chunk_seconds: float = 0.5
    chunk_hop_seconds: float = 0.25
    weights: LossWeights = field(default_factory=LossWeights)
    disc: DiscriminatorConfig = field(default_factory=DiscriminatorConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    out_dir: str | None = None

    def __post_init__(self):
        if self.total_steps < 0 or self.batch_size < 1:
            raise ValueError("steps must be >= 0 and batch size >= 1")
        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ValueError("learning rates must be positive")

    def transform(self) -> SpectroTransformSpec:
        from fractions import Fraction

        return make_transform_pair(self.scale, self.fft_size,
                                   Fraction(self.overlap_ratio).limit_denominator(8))

    @property
    def adversarial(self) -> bool:
        return self.weights.lambda_adv > 0


@dataclass
class Checkpoint:
    step: int
    generator: ParameterSet
    discriminator: dict
    opt_g_state: dict
    opt_d_state: dict
    config: TrainConfig
    torch_rng: torch.Tensor


class TrainState:
    def __init__(self, config: TrainConfig):
        self.config = config
        self.spec = config.transform()
        torch.manual_seed(config.seed)
        self.net = SpectralUNet(config.model)
        from .model import _init_parameters

        _init_parameters(self.net, torch.Generator().manual_seed(config.seed))
        self.disc = MultiScaleDiscriminator(config.disc)
        self.opt_g = torch.optim.Adam(self.net.parameters(), lr=config.lr_g,
                                      betas=config.betas)
        self.opt_d = torch.optim.Adam(self.disc.parameters(), lr=config.lr_d,
                                      betas=config.betas)
        self.step = 0

    def to_checkpoint(self) -> Checkpoint:
        return Checkpoint(
            step=self.step,
            generator=params_from_module(self.net),
            discriminator={k: v.detach().cpu().numpy().copy()
                           for k, v in self.disc.state_dict().items()},
            opt_g_state=self.opt_g.state_dict(),
            opt_d_state=self.opt_d.state_dict(),
            config=self.config,
            torch_rng=torch.get_rng_state(),
        )

    def restore(self, ckpt: Checkpoint) -> None:
        self.step = ckpt.step
        load_into_module(ckpt.generator, self.net)
        self.disc.load_state_dict(
            {k: torch.from_numpy(v.copy()) for k, v in ckpt.discriminator.items()})
        self.opt_g.load_state_dict(ckpt.opt_g_state)
        self.opt_d.load_state_dict(ckpt.opt_d_state)
        torch.set_rng_state(ckpt.torch_rng)


def _batch_tensors(batch: list[TrainChunk]) -> tuple[torch.Tensor, torch.Tensor]:
    if not batch:
        raise ValueError("batch must be non-empty")
    lr_lens = {len(c.lr) for c in batch}
    hr_lens = {len(c.hr) for c in batch}
    if len(lr_lens) != 1 or len(hr_lens) != 1:
        raise ValueError(f"batch shapes not uniform: lr {lr_lens}, hr {hr_lens}")
    lr = torch.from_numpy(np.stack([c.lr.samples for c in batch])).float()
    hr = torch.from_numpy(np.stack([c.hr.samples for c in batch])).float()
    return lr, hr


def _grad_norm(params) -> float:
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(p.grad.norm()) ** 2
    return math.sqrt(total)


def train_step(state: TrainState, batch: list[TrainChunk]) -> LossReport:
    """One GAN step: discriminator update on (y, yhat.detach()), then the
    generator on the combined objective. Gradients are norm-clipped."""
    cfg = state.config
    lr, hr = _batch_tensors(batch)
    yhat = forward_waveform(state.net, lr, state.spec)

    if cfg.adversarial and state.step % cfg.disc_update_every == 0:
        real_logits, _ = state.disc(hr)
        fake_logits, _ = state.disc(yhat.detach())
        d_loss = discriminator_loss(real_logits, fake_logits, cfg.adv_formulation)
        state.opt_d.zero_grad()
        d_loss.backward()
        torch.nn.utils.clip_grad_norm_(state.disc.parameters(), cfg.grad_clip)
        state.opt_d.step()

    disc = state.disc if (cfg.weights.lambda_adv > 0 or cfg.weights.lambda_feat > 0) else None
    total, report = generator_objective(hr, yhat, disc, cfg.weights, cfg.adv_formulation)
    state.opt_g.zero_grad()
    total.backward()
    torch.nn.utils.clip_grad_norm_(state.net.parameters(), cfg.grad_clip)
    state.opt_g.step()
    state.step += 1

    if not all(math.isfinite(v) for v in report.as_dict().values()):
        raise RuntimeError(
            "non-finite loss; diagnostic dump: "
            + json.dumps({
                "step": state.step,
                "losses": report.as_dict(),
                "grad_norm_g": _grad_norm(state.net.parameters()),
                "grad_norm_d": _grad_norm(state.disc.parameters()),
            })
        )
    return report


def _select_batch(dataset: list[TrainChunk], config: TrainConfig, step: int) -> list[TrainChunk]:
    # stateless per-step sampling keeps resumed runs identical to uninterrupted ones
    rng = np.random.default_rng([config.seed, step])
    indices = rng.integers(0, len(dataset), config.batch_size)
    return [dataset[i] for i in indices]


def fit(config: TrainConfig, dataset: list[TrainChunk],
        resume: Checkpoint | str | Path | None = None) -> Checkpoint:
    """Run the training loop; emits JSON-lines logs and periodic checkpoints
    when config.out_dir is set. Deterministic given seed and device."""
    if not dataset:
        raise ValueError("dataset is empty")
    state = TrainState(config)
    if resume is not None:
        if not isinstance(resume, Checkpoint):
            resume = load_checkpoint(resume)
        state.restore(resume)

    out_dir = Path(config.out_dir) if config.out_dir else None
    log_fh = None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        log_fh = open(out_dir / "train_log.jsonl", "a", encoding="utf-8")
    try:
        while state.step < config.total_steps:
            batch = _select_batch(dataset, config, state.step)
            report = train_step(state, batch)
            if log_fh and (state.step % config.log_every == 0
                           or state.step == config.total_steps):
                log_fh.write(json.dumps({"step": state.step, **report.as_dict()}) + "\n")
                log_fh.flush()
            if out_dir and config.ckpt_every and state.step % config.ckpt_every == 0:
                save_checkpoint(state.to_checkpoint(), out_dir / f"step_{state.step:07d}.ckpt")
    finally:
        if log_fh:
            log_fh.close()
    ckpt = state.to_checkpoint()
    if out_dir:
        save_checkpoint(ckpt, out_dir / "final.ckpt")
    return ckpt


_CHECKPOINT_KEYS = {"kind", "step", "model_config", "generator_arrays", "discriminator_arrays",
                    "opt_g_state", "opt_d_state", "train_config", "torch_rng"}


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    save_container({
        "kind": "train_checkpoint",
        "step": ckpt.step,
        "model_config": asdict(ckpt.config.model),
        "generator_arrays": dict(ckpt.generator.arrays),
        "discriminator_arrays": ckpt.discriminator,
        "opt_g_state": ckpt.opt_g_state,
        "opt_d_state": ckpt.opt_d_state,
        "train_config": asdict(ckpt.config),
        "torch_rng": ckpt.torch_rng,
    }, path)


def _config_from_dict(raw: dict) -> TrainConfig:
    raw = dict(raw)
    raw["weights"] = LossWeights(**raw["weights"])
    disc = dict(raw["disc"])
    disc["layers"] = tuple(tuple(layer) for layer in disc["layers"])
    raw["disc"] = DiscriminatorConfig(**disc)
    model = dict(raw["model"])
    for key in ("freq_strides", "inner_layers_with_sequence_modules"):
        model[key] = tuple(model[key])
    raw["model"] = ModelConfig(**model)
    raw["betas"] = tuple(raw["betas"])
    return TrainConfig(**raw)


def load_checkpoint(path: str | Path) -> Checkpoint:
    record = load_container(path, known_keys=_CHECKPOINT_KEYS)
    missing = _CHECKPOINT_KEYS - set(record)
    if missing:
        raise CheckpointError(f"checkpoint {path} missing keys: {sorted(missing)}")
    config = _config_from_dict(record["train_config"])
    from collections import OrderedDict

    generator = ParameterSet(arrays=OrderedDict(record["generator_arrays"]),
                             config=config.model)
    return Checkpoint(
        step=record["step"],
        generator=generator,
        discriminator=record["discriminator_arrays"],
        opt_g_state=record["opt_g_state"],
        opt_d_state=record["opt_d_state"],
        config=config,
        torch_rng=record["torch_rng"],
    )


def save_params(params: ParameterSet, path: str | Path) -> None:
    """Generator-only container, for inference-time distribution."""
    save_container({
        "kind": "generator_params",
        "model_config": asdict(params.config),
        "arrays": dict(params.arrays),
    }, path)


def load_params(path: str | Path) -> ParameterSet:
    from collections import OrderedDict

    record = load_container(path, known_keys={"kind", "model_config", "arrays"})
    raw = dict(record["model_config"])
    for key in ("freq_strides", "inner_layers_with_sequence_modules"):
        raw[key] = tuple(raw[key])
    return ParameterSet(arrays=OrderedDict(record["arrays"]), config=ModelConfig(**raw))
