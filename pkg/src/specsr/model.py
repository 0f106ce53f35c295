"""Complex-spectrogram U-Net generator.

The network sees a (2, F, N) real/imaginary grid and predicts one of the same
shape. All convolutions act along the frequency axis only (kernel (k, 1) on
the (F, N) grid); time is handled by LSTM and windowed attention modules in
the two innermost encoder layers.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .spectral import CacArray

PARAMS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    in_channels: int = 2
    base_channels: int = 48
    channel_growth: int = 2
    depth: int = 4
    freq_strides: tuple[int, ...] = (4, 4, 2, 2)
    kernel_size: int = 8
    bins: int = 256
    residual_branches_per_layer: int = 2
    branch_compress_factor: int = 4
    inner_layers_with_sequence_modules: tuple[int, ...] = (3, 4)
    lstm_layers: int = 2
    attention_heads: int = 4
    attention_window: int = 100
    use_ftb: bool = True
    activation: str = "snake"
    snake_alpha_init: float = 1.0
    skip_mode: str = "concat"

    def __post_init__(self):
        if self.depth != len(self.freq_strides):
            raise ValueError("depth must equal len(freq_strides)")
        if math.prod(self.freq_strides) != 64:
            raise ValueError(f"freq_strides must compress 64-fold, got {self.freq_strides}")
        if self.bins % math.prod(self.freq_strides) != 0:
            raise ValueError(
                f"bins={self.bins} not divisible by the stride product 64;"
                " drop the Nyquist row before packing (fft/2 bins, not fft/2+1)"
            )
        if self.activation not in ("snake", "gelu", "relu"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.skip_mode != "concat":
            raise ValueError("only concatenated skips are supported")

    def layer_channels(self, layer: int) -> int:
        """Channel count at the output of encoder layer `layer` (1-indexed)."""
        return self.base_channels * self.channel_growth ** (layer - 1)


@dataclass
class ParameterSet:
    """Named weight arrays plus the config needed to rebuild the module."""

    arrays: "OrderedDict[str, np.ndarray]"
    config: ModelConfig
    version: int = PARAMS_FORMAT_VERSION

    def __post_init__(self):
        for name, arr in self.arrays.items():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"parameter {name!r} contains non-finite values")
        if len(set(self.arrays)) != len(self.arrays):
            raise ValueError("duplicate parameter names")

    def total_count(self) -> int:
        return sum(int(a.size) for a in self.arrays.values())


@dataclass(frozen=True)
class LatentGrid:
    channels: int
    freq: int
    frames: int


def snake(x, alpha):
    """Periodicity-biased activation: x + sin^2(alpha*x)/alpha, elementwise."""
    if isinstance(x, torch.Tensor):
        return x + torch.sin(alpha * x) ** 2 / alpha
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("alpha must be positive")
    return x + np.sin(alpha * x) ** 2 / alpha


class Snake(nn.Module):
    """Snake with a learnable per-channel alpha, broadcast over (B, C, F, N)."""

    def __init__(self, channels: int, alpha_init: float = 1.0):
        super().__init__()
        self.alpha = nn.Parameter(torch.full((channels,), float(alpha_init)))

    def forward(self, x):
        return snake(x, self.alpha.view(1, -1, 1, 1))


def make_activation(cfg: ModelConfig, channels: int) -> nn.Module:
    if cfg.activation == "snake":
        return Snake(channels, cfg.snake_alpha_init)
    return nn.GELU() if cfg.activation == "gelu" else nn.ReLU()


class FrequencyTransformBlock(nn.Module):
    """Frequency attention plus a learned frequency-to-frequency linear map.

    Path (a) masks the input with a non-negative per-position attention built
    from channel-compressed 1x1 convs; path (b) applies a learnable FxF matrix
    along the frequency axis per frame; both are concatenated and reduced back
    to C channels. Every path is linear or multiplicative in the input, so
    zero in gives zero out.
    """

    def __init__(self, channels: int, freq_bins: int):
        super().__init__()
        hidden = max(channels // 4, 1)
        self.freq_bins = freq_bins
        self.att_compress = nn.Conv2d(channels, hidden, 1)
        self.att_expand = nn.Conv2d(hidden, channels, 1)
        self.freq_matrix = nn.Parameter(torch.eye(freq_bins))
        self.combine = nn.Conv2d(2 * channels, channels, 1, bias=False)

    def forward(self, x):
        if x.shape[2] != self.freq_bins:
            raise ValueError(
                f"input has {x.shape[2]} frequency bins, block was built for {self.freq_bins}"
            )
        # softplus keeps the mask non-negative without relu's dead zones
        mask = F.softplus(self.att_expand(F.softplus(self.att_compress(x))))
        attended = x * mask
        transformed = torch.einsum("fg,bcgn->bcfn", self.freq_matrix, x)
        return self.combine(torch.cat([attended, transformed], dim=1))


class LocalTemporalAttention(nn.Module):
    """Dot-product self-attention over frames, restricted to a sliding window."""

    def __init__(self, dim: int, heads: int, window: int):
        super().__init__()
        if dim % heads != 0:
            raise ValueError(f"attention dim {dim} not divisible by {heads} heads")
        self.heads = heads
        self.window = window
        self.qkv = nn.Linear(dim, 3 * dim)
        self.proj = nn.Linear(dim, dim)

    def forward(self, x):  # (batch, frames, dim)
        b, n, d = x.shape
        h = self.heads
        q, k, v = self.qkv(x).reshape(b, n, 3, h, d // h).permute(2, 0, 3, 1, 4)
        scores = q @ k.transpose(-2, -1) / math.sqrt(d // h)
        idx = torch.arange(n, device=x.device)
        outside = (idx[:, None] - idx[None, :]).abs() > self.window // 2
        scores = scores.masked_fill(outside, float("-inf"))
        out = (scores.softmax(dim=-1) @ v).transpose(1, 2).reshape(b, n, d)
        return self.proj(out)


class TimeSequenceModule(nn.Module):
    """BiLSTM over frames followed by local attention, frequency folded into batch."""

    def __init__(self, dim: int, cfg: ModelConfig):
        super().__init__()
        self.lstm = nn.LSTM(dim, dim, num_layers=cfg.lstm_layers,
                            batch_first=True, bidirectional=True)
        self.lstm_proj = nn.Linear(2 * dim, dim)
        self.attention = LocalTemporalAttention(dim, cfg.attention_heads, cfg.attention_window)

    def forward(self, x):  # (B, C, F, N)
        b, c, f, n = x.shape
        seq = x.permute(0, 2, 3, 1).reshape(b * f, n, c)
        seq = seq + self.lstm_proj(self.lstm(seq)[0])
        seq = seq + self.attention(seq)
        return seq.reshape(b, f, n, c).permute(0, 3, 1, 2)


class ResidualBranch(nn.Module):
    """Channel-compressed branch with a dilated frequency conv, optional
    time modules, and a GLU expansion, added back through a small learnable gain."""

    def __init__(self, channels: int, dilation: int, cfg: ModelConfig, with_sequence: bool):
        super().__init__()
        hidden = max(channels // cfg.branch_compress_factor, 1)
        self.compress = nn.Conv2d(channels, hidden, 1)
        self.freq_conv = nn.Conv2d(hidden, hidden, (3, 1), padding=(dilation, 0),
                                   dilation=(dilation, 1))
        self.act = make_activation(cfg, hidden)
        self.sequence = TimeSequenceModule(hidden, cfg) if with_sequence else None
        self.expand = nn.Conv2d(hidden, 2 * channels, 1)
        self.gain = nn.Parameter(torch.tensor(1e-3))

    def forward(self, x):
        h = self.act(self.freq_conv(self.compress(x)))
        if self.sequence is not None:
            h = self.sequence(h)
        return x + self.gain * F.glu(self.expand(h), dim=1)


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig, layer: int, freq_in: int):
        super().__init__()
        c_in = cfg.in_channels if layer == 1 else cfg.layer_channels(layer - 1)
        c_out = cfg.layer_channels(layer)
        stride = cfg.freq_strides[layer - 1]
        k = cfg.kernel_size
        self.ftb = FrequencyTransformBlock(c_in, freq_in) if cfg.use_ftb else None
        self.down = nn.Conv2d(c_in, c_out, (k, 1), stride=(stride, 1),
                              padding=((k - stride) // 2, 0))
        self.act = make_activation(cfg, c_out)
        with_seq = layer in cfg.inner_layers_with_sequence_modules
        self.branches = nn.ModuleList(
            ResidualBranch(c_out, 2 ** i, cfg, with_seq)
            for i in range(cfg.residual_branches_per_layer)
        )
        self.out_gate = nn.Conv2d(c_out, 2 * c_out, 1)

    def forward(self, x):
        if self.ftb is not None:
            x = self.ftb(x)
        x = self.act(self.down(x))
        for branch in self.branches:
            x = branch(x)
        return F.glu(self.out_gate(x), dim=1)


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig, layer: int):
        super().__init__()
        c = cfg.layer_channels(layer)
        c_out = cfg.in_channels if layer == 1 else cfg.layer_channels(layer - 1)
        stride = cfg.freq_strides[layer - 1]
        k = cfg.kernel_size
        self.in_gate = nn.Conv2d(2 * c, 2 * c, 1)  # skip concat doubles channels
        self.up = nn.ConvTranspose2d(c, c_out, (k, 1), stride=(stride, 1),
                                     padding=((k - stride) // 2, 0))
        self.act = None if layer == 1 else make_activation(cfg, c_out)

    def forward(self, x, skip):
        x = F.glu(self.in_gate(torch.cat([x, skip], dim=1)), dim=1)
        x = self.up(x)
        return x if self.act is None else self.act(x)


class SpectralUNet(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        freqs = [cfg.bins]
        for s in cfg.freq_strides:
            freqs.append(freqs[-1] // s)
        self.encoder = nn.ModuleList(
            EncoderLayer(cfg, layer, freqs[layer - 1]) for layer in range(1, cfg.depth + 1)
        )
        self.decoder = nn.ModuleList(
            DecoderLayer(cfg, layer) for layer in range(cfg.depth, 0, -1)
        )

    def _check(self, t: torch.Tensor, name: str) -> torch.Tensor:
        if not torch.isfinite(t).all():
            raise RuntimeError(f"non-finite activations after {name}")
        return t

    def encode(self, x: torch.Tensor) -> tuple[torch.Tensor, list[torch.Tensor]]:
        skips = []
        for i, layer in enumerate(self.encoder):
            x = self._check(layer(x), f"encoder.{i}")
            skips.append(x)
        return x, skips

    def decode(self, x: torch.Tensor, skips: list[torch.Tensor]) -> torch.Tensor:
        for i, layer in enumerate(self.decoder):
            x = self._check(layer(x, skips[-1 - i]), f"decoder.{i}")
        return x

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[2] % math.prod(self.cfg.freq_strides) != 0:
            raise ValueError(
                f"{x.shape[2]} frequency bins not divisible by the 64-fold stride"
                " product; pack spectrograms with the Nyquist row dropped"
            )
        latent, skips = self.encode(x)
        return self.decode(latent, skips)

    def latent_grid(self, frames: int) -> LatentGrid:
        return LatentGrid(
            channels=self.cfg.layer_channels(self.cfg.depth),
            freq=self.cfg.bins // math.prod(self.cfg.freq_strides),
            frames=frames,
        )


def _init_parameters(module: nn.Module, generator: torch.Generator) -> None:
    """Uniform fan-in init in named order; LSTM forget-gate bias 1.0."""
    for name, p in module.named_parameters():
        if name.endswith(".gain") or name.endswith(".alpha") or name.endswith(".freq_matrix"):
            continue  # purpose-specific initializations set at construction
        if ".lstm." in name:
            hidden = p.shape[0] // 4 if p.dim() >= 1 else 1
            bound = 1.0 / math.sqrt(hidden)
            p.data.uniform_(-bound, bound, generator=generator)
            if "bias_ih" in name:
                p.data[hidden:2 * hidden] = 1.0
            elif "bias_hh" in name:
                p.data[hidden:2 * hidden] = 0.0
            continue
        if p.dim() >= 2:
            fan_in, _ = nn.init._calculate_fan_in_and_fan_out(p)
            bound = 1.0 / math.sqrt(fan_in)
            p.data.uniform_(-bound, bound, generator=generator)
        else:  # biases: fan-in of the owning layer's weight is not at hand; use size
            bound = 1.0 / math.sqrt(max(p.numel(), 1))
            p.data.uniform_(-bound, bound, generator=generator)


def build_model(cfg: ModelConfig, seed: int) -> ParameterSet:
    """Deterministically initialized parameters for the given config."""
    torch.manual_seed(seed)
    net = SpectralUNet(cfg)
    generator = torch.Generator().manual_seed(seed)
    _init_parameters(net, generator)
    arrays = OrderedDict(
        (name, p.detach().numpy().copy()) for name, p in net.named_parameters()
    )
    return ParameterSet(arrays=arrays, config=cfg)


def load_into_module(params: ParameterSet, net: SpectralUNet | None = None) -> SpectralUNet:
    net = net or SpectralUNet(params.config)
    state = {name: torch.from_numpy(arr.copy()) for name, arr in params.arrays.items()}
    net.load_state_dict(state)
    return net


def params_from_module(net: SpectralUNet) -> ParameterSet:
    arrays = OrderedDict(
        (name, p.detach().cpu().numpy().copy()) for name, p in net.named_parameters()
    )
    return ParameterSet(arrays=arrays, config=net.cfg)


def model_forward(params: ParameterSet, X: CacArray) -> CacArray:
    """Single-item inference: (2, F, N) in, (2, F, N) out."""
    net = load_into_module(params).eval()
    xt = torch.from_numpy(X.values[None]).float()
    with torch.no_grad():
        y = net(xt)
    return CacArray(y[0].double().numpy(), X.source_rate)


def parameter_summary(params: ParameterSet) -> list[tuple[str, tuple[int, ...], int]]:
    """(name, shape, count) rows; sum of counts is the model size."""
    return [(name, tuple(a.shape), int(a.size)) for name, a in params.arrays.items()]
