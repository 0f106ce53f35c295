"""Spectral-domain audio super-resolution.

A low-resolution waveform is analysed with a shrunken STFT (window and hop
divided by the upsampling scale), a complex-spectrogram U-Net predicts the
full-band spectrogram, and a full-size iSTFT synthesises the high-resolution
waveform. Training combines a multi-resolution spectral loss with multi-scale
waveform discriminators; evaluation covers LSD, a ViSQOL client, and
listening-test export.
"""
from .audio import WaveSignal, read_wav, write_wav
from .data import PairSpec, TrainChunk, build_manifest, chunk_stream, make_lr_hr_pair, split_vctk
from .inference import super_resolve
from .losses import LossReport, LossWeights, multi_res_spectral_loss
from .metrics import LsdConfig, evaluate_testset, lsd, visqol_score
from .model import ModelConfig, ParameterSet, SpectralUNet, build_model, model_forward
from .msd import DiscriminatorConfig, MultiScaleDiscriminator
from .resample import lowpass_filter, sinc_resample
from .spectral import (
    CacArray,
    ComplexSpectrogram,
    SpectroTransformSpec,
    StftConfig,
    cac_to_complex,
    complex_to_cac,
    istft,
    make_transform_pair,
    stft,
)
from .train import Checkpoint, TrainConfig, fit, load_checkpoint, save_checkpoint, train_step

__version__ = "0.1.0"

__all__ = [
    "WaveSignal", "read_wav", "write_wav",
    "StftConfig", "SpectroTransformSpec", "ComplexSpectrogram", "CacArray",
    "stft", "istft", "make_transform_pair", "complex_to_cac", "cac_to_complex",
    "sinc_resample", "lowpass_filter",
    "ModelConfig", "ParameterSet", "SpectralUNet", "build_model", "model_forward",
    "super_resolve",
    "LossWeights", "LossReport", "multi_res_spectral_loss",
    "DiscriminatorConfig", "MultiScaleDiscriminator",
    "PairSpec", "TrainChunk", "build_manifest", "split_vctk", "make_lr_hr_pair",
    "chunk_stream",
    "TrainConfig", "Checkpoint", "fit", "train_step", "save_checkpoint", "load_checkpoint",
    "LsdConfig", "lsd", "visqol_score", "evaluate_testset",
]
