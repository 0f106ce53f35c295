"""End-to-end spectral upsampling: analysis STFT -> network -> synthesis iSTFT."""
from __future__ import annotations

import torch
from torch import nn

from .audio import WaveSignal
from .model import ParameterSet, SpectralUNet, load_into_module
from .spectral import SpectroTransformSpec, expected_frames, istft_tensor, stft_tensor


class IdentityModel(nn.Module):
    """Pass-through stand-in for the generator; isolates the transform pair."""

    def forward(self, x):
        return x


def _reconcile_frames(S: torch.Tensor, n_expected: int) -> torch.Tensor:
    """Trim or zero-pad the frame axis; counts differ only when fft_size/scale
    rounds, and then by at most a frame or two."""
    n = S.shape[-1]
    if n > n_expected:
        return S[..., :n_expected]
    if n < n_expected:
        pad = torch.zeros(*S.shape[:-1], n_expected - n, dtype=S.dtype, device=S.device)
        return torch.cat([S, pad], dim=-1)
    return S


def forward_waveform(net, x: torch.Tensor, spec: SpectroTransformSpec) -> torch.Tensor:
    """Differentiable (B, T) -> (B, scale*T) pipeline around a (B,2,F,N) network."""
    out_length = spec.scale * x.shape[-1]
    S = stft_tensor(x, spec.analysis)
    S = S[..., :-1, :]  # drop Nyquist row so bins divide by the stride product
    cac = torch.stack([S.real, S.imag], dim=-3)
    if isinstance(net, nn.Module):
        p = next(net.parameters(), None)
        if p is not None and cac.dtype != p.dtype:
            cac = cac.to(p.dtype)
    out = net(cac)
    Y = torch.complex(out.select(-3, 0), out.select(-3, 1))
    nyquist = torch.zeros(*Y.shape[:-2], 1, Y.shape[-1], dtype=Y.dtype, device=Y.device)
    Y = torch.cat([Y, nyquist], dim=-2)
    Y = _reconcile_frames(Y, expected_frames(spec.synthesis, out_length))
    return istft_tensor(Y, spec.synthesis, out_length)


def super_resolve(model: ParameterSet | nn.Module, x: WaveSignal,
                  spec: SpectroTransformSpec) -> WaveSignal:
    """Upsample a waveform by spec.scale; output has exactly scale*len samples."""
    net = load_into_module(model) if isinstance(model, ParameterSet) else model
    if isinstance(net, nn.Module):
        net = net.eval()
    xt = torch.from_numpy(x.samples)[None]
    with torch.no_grad():
        y = forward_waveform(net, xt, spec)
    return WaveSignal(y[0].double().numpy(), spec.scale * x.sample_rate)


def make_net(params: ParameterSet) -> SpectralUNet:
    return load_into_module(params).eval()
