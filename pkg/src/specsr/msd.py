"""Multi-scale waveform discriminators (MelGAN-family conv stacks)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

# (out_channels, kernel, stride, groups); a final kernel-3 conv emits logits
DEFAULT_LAYERS = (
    (16, 15, 1, 1),
    (64, 41, 4, 4),
    (256, 41, 4, 16),
    (1024, 41, 4, 64),
    (1024, 41, 4, 256),
    (1024, 5, 1, 1),
)


@dataclass(frozen=True)
class DiscriminatorConfig:
    num_discriminators: int = 3
    downsample_factor: int = 2
    layers: tuple[tuple[int, int, int, int], ...] = DEFAULT_LAYERS
    leaky_slope: float = 0.2

    def __post_init__(self):
        if self.num_discriminators < 1:
            raise ValueError("need at least one discriminator")

    def stride_product(self) -> int:
        return math.prod(stride for _, _, stride, _ in self.layers)

    def min_input_length(self) -> int:
        """Shortest waveform accepted: the deepest (most pooled) scale must
        still cover one full stride product of the conv stack."""
        return self.stride_product() * self.downsample_factor ** (self.num_discriminators - 1)


class ScaleDiscriminator(nn.Module):
    def __init__(self, cfg: DiscriminatorConfig):
        super().__init__()
        convs = []
        c_in = 1
        for c_out, kernel, stride, groups in cfg.layers:
            convs.append(nn.Conv1d(c_in, c_out, kernel, stride=stride,
                                   groups=groups, padding=(kernel - 1) // 2))
            c_in = c_out
        self.convs = nn.ModuleList(convs)
        self.logit_conv = nn.Conv1d(c_in, 1, 3, padding=1)
        self.act = nn.LeakyReLU(cfg.leaky_slope)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, list[torch.Tensor]]:
        feats = []
        for conv in self.convs:
            x = self.act(conv(x))
            feats.append(x)
        return self.logit_conv(x), feats


class MultiScaleDiscriminator(nn.Module):
    """Identical conv stacks applied at progressively average-pooled scales."""

    def __init__(self, cfg: DiscriminatorConfig | None = None):
        super().__init__()
        self.cfg = cfg or DiscriminatorConfig()
        self.scales = nn.ModuleList(
            ScaleDiscriminator(self.cfg) for _ in range(self.cfg.num_discriminators)
        )
        d = self.cfg.downsample_factor
        self.pool = nn.AvgPool1d(kernel_size=2 * d, stride=d, padding=d // 2,
                                 count_include_pad=False)

    def forward(self, w: torch.Tensor) -> tuple[list[torch.Tensor], list[list[torch.Tensor]]]:
        """(B, T) or (T,) waveform -> per-scale logits and layer features."""
        if w.dim() == 1:
            w = w[None]
        minimum = self.cfg.min_input_length()
        if w.shape[-1] < minimum:
            raise ValueError(
                f"waveform of {w.shape[-1]} samples is shorter than the"
                f" {minimum}-sample minimum for {self.cfg.num_discriminators} scales"
            )
        x = w[:, None, :]
        logits, features = [], []
        for i, scale in enumerate(self.scales):
            if i > 0:
                x = self.pool(x)
            logit, feats = scale(x)
            logits.append(logit)
            features.append(feats)
        return logits, features
