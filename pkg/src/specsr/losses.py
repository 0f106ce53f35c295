"""Training objectives: multi-resolution spectral loss, hinge adversarial and
feature-matching terms, and their weighted combination."""
from __future__ import annotations

from dataclasses import dataclass

import torch

from .audio import WaveSignal


@dataclass(frozen=True)
class StftLossResolution:
    fft_size: int
    hop_length: int
    win_length: int


# fft / hop / window triples zipped in order
MULTI_RES_RESOLUTIONS = (
    StftLossResolution(512, 50, 240),
    StftLossResolution(1024, 120, 600),
    StftLossResolution(2048, 240, 1200),
)

LOG_FLOOR = 1e-7


@dataclass(frozen=True)
class LossWeights:
    lambda_spectral: float = 1.0
    lambda_adv: float = 1.0
    lambda_feat: float = 10.0

    def __post_init__(self):
        if self.lambda_spectral < 0 or self.lambda_adv < 0 or self.lambda_feat < 0:
            raise ValueError("loss weights must be non-negative")
        if self.lambda_spectral == self.lambda_adv == self.lambda_feat == 0:
            raise ValueError("at least one loss weight must be non-zero")


@dataclass(frozen=True)
class LossReport:
    spectral_sc: float
    spectral_mag: float
    adversarial_g: float
    feature_match: float
    total_g: float
    total_d: float

    def as_dict(self) -> dict:
        return {
            "spectral_sc": self.spectral_sc,
            "spectral_mag": self.spectral_mag,
            "adversarial_g": self.adversarial_g,
            "feature_match": self.feature_match,
            "total_g": self.total_g,
            "total_d": self.total_d,
        }


def _magnitude(x: torch.Tensor, res: StftLossResolution) -> torch.Tensor:
    window = torch.hann_window(res.win_length, dtype=x.dtype, device=x.device)
    S = torch.stft(x, n_fft=res.fft_size, hop_length=res.hop_length,
                   win_length=res.win_length, window=window, center=True,
                   pad_mode="reflect", return_complex=True)
    return S.abs()


def spectral_loss_terms(y: torch.Tensor, yhat: torch.Tensor,
                        res: StftLossResolution) -> tuple[torch.Tensor, torch.Tensor]:
    """Spectral convergence and log-magnitude terms on (B, T) or (T,) tensors."""
    mag_y = _magnitude(y, res)
    mag_yhat = _magnitude(yhat, res)
    denom = torch.linalg.norm(mag_y, dim=(-2, -1))
    if torch.any(denom == 0):
        raise ValueError("all-zero reference signal: spectral convergence undefined")
    sc = (torch.linalg.norm(mag_y - mag_yhat, dim=(-2, -1)) / denom).mean()
    mag = (mag_y.clamp_min(LOG_FLOOR).log()
           - mag_yhat.clamp_min(LOG_FLOOR).log()).abs().mean()
    return sc, mag


def multi_res_terms(y: torch.Tensor, yhat: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Mean of the three fixed-resolution loss terms."""
    sc_total = 0.0
    mag_total = 0.0
    for res in MULTI_RES_RESOLUTIONS:
        sc, mag = spectral_loss_terms(y, yhat, res)
        sc_total = sc_total + sc
        mag_total = mag_total + mag
    n = len(MULTI_RES_RESOLUTIONS)
    return sc_total / n, mag_total / n


def _check_pair(y: WaveSignal, yhat: WaveSignal) -> None:
    if len(y) != len(yhat) or y.sample_rate != yhat.sample_rate:
        raise ValueError(
            f"signals must share length and rate: {len(y)}@{y.sample_rate}"
            f" vs {len(yhat)}@{yhat.sample_rate}"
        )


def spectral_loss_single(y: WaveSignal, yhat: WaveSignal,
                         res: StftLossResolution) -> tuple[float, float]:
    _check_pair(y, yhat)
    sc, mag = spectral_loss_terms(torch.from_numpy(y.samples),
                                  torch.from_numpy(yhat.samples), res)
    return float(sc), float(mag)


def multi_res_spectral_loss(y: WaveSignal, yhat: WaveSignal) -> tuple[float, float]:
    _check_pair(y, yhat)
    sc, mag = multi_res_terms(torch.from_numpy(y.samples), torch.from_numpy(yhat.samples))
    return float(sc), float(mag)


def discriminator_loss(real_logits, fake_logits, formulation: str = "hinge") -> torch.Tensor:
    """Mean over scales of the discriminator objective (hinge by default)."""
    if len(real_logits) != len(fake_logits):
        raise ValueError("real/fake logit scale counts differ")
    total = 0.0
    for real, fake in zip(real_logits, fake_logits):
        if formulation == "hinge":
            total = total + torch.relu(1.0 - real).mean() + torch.relu(1.0 + fake).mean()
        elif formulation == "lsgan":
            total = total + ((real - 1.0) ** 2).mean() + (fake ** 2).mean()
        else:
            raise ValueError(f"unknown formulation {formulation!r}")
    return total / len(real_logits)


def generator_adv_loss(fake_logits, formulation: str = "hinge") -> torch.Tensor:
    total = 0.0
    for fake in fake_logits:
        if formulation == "hinge":
            total = total + torch.relu(1.0 - fake).mean()
        elif formulation == "lsgan":
            total = total + ((fake - 1.0) ** 2).mean()
        else:
            raise ValueError(f"unknown formulation {formulation!r}")
    return total / len(fake_logits)


def feature_matching_loss(real_feats, fake_feats) -> torch.Tensor:
    """Mean absolute feature difference, per layer normalized by the real
    feature magnitude (floored at 1e-7), averaged over layers and scales."""
    total = 0.0
    count = 0
    for real_scale, fake_scale in zip(real_feats, fake_feats):
        for fr, ff in zip(real_scale, fake_scale):
            denom = fr.abs().mean().clamp_min(LOG_FLOOR)
            total = total + (fr - ff).abs().mean() / denom
            count += 1
    return total / count


def generator_objective(y: torch.Tensor, yhat: torch.Tensor, discriminator,
                        weights: LossWeights,
                        formulation: str = "hinge") -> tuple[torch.Tensor, LossReport]:
    """Weighted generator loss plus a per-term report.

    The discriminator terms are evaluated only when their weights are
    non-zero; with lambda_adv = lambda_feat = 0 this is the pure spectral
    objective.
    """
    sc, mag = multi_res_terms(y, yhat)
    adv = torch.zeros(())
    feat = torch.zeros(())
    total_d = torch.zeros(())
    if discriminator is not None and (weights.lambda_adv > 0 or weights.lambda_feat > 0):
        d_dtype = next(discriminator.parameters()).dtype
        fake_logits, fake_feats = discriminator(yhat.to(d_dtype))
        with torch.no_grad():
            real_logits, real_feats = discriminator(y.to(d_dtype))
        if weights.lambda_adv > 0:
            adv = generator_adv_loss(fake_logits, formulation)
        if weights.lambda_feat > 0:
            feat = feature_matching_loss(real_feats, fake_feats)
        total_d = discriminator_loss(
            [r.detach() for r in real_logits], [f.detach() for f in fake_logits],
            formulation)
    total = (weights.lambda_spectral * (sc + mag)
             + weights.lambda_adv * adv
             + weights.lambda_feat * feat)
    report = LossReport(
        spectral_sc=float(sc.detach()), spectral_mag=float(mag.detach()),
        adversarial_g=float(adv.detach()), feature_match=float(feat.detach()),
        total_g=float(total.detach()), total_d=float(total_d.detach()),
    )
    return total, report


def total_generator_loss(y: WaveSignal, yhat: WaveSignal, discriminator,
                         weights: LossWeights) -> LossReport:
    _check_pair(y, yhat)
    _, report = generator_objective(
        torch.from_numpy(y.samples), torch.from_numpy(yhat.samples),
        discriminator, weights)
    return report
