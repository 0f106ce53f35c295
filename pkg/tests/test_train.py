"""Trainer contracts: update rules, determinism, checkpoint round trips."""
import json

import numpy as np
import pytest
import torch

from specsr.audio import WaveSignal
from specsr.checkpoint import CheckpointError
from specsr.data import TrainChunk
from specsr.losses import LossWeights
from specsr.model import ModelConfig
from specsr.msd import DiscriminatorConfig
from specsr.train import (
    TrainConfig,
    TrainState,
    fit,
    load_checkpoint,
    load_params,
    save_checkpoint,
    save_params,
    train_step,
)

TINY_DISC = DiscriminatorConfig(num_discriminators=1,
                                layers=((4, 15, 1, 1), (8, 41, 4, 4)))


def tiny_config(**over) -> TrainConfig:
    base = dict(
        scale=2, fft_size=128, total_steps=5, batch_size=2,
        log_every=1, ckpt_every=0,
        weights=LossWeights(1, 0, 0), disc=TINY_DISC,
        model=ModelConfig(base_channels=8, bins=64, attention_window=16),
    )
    base.update(over)
    return TrainConfig(**base)


def make_dataset(n_chunks=4, lr_len=1000, scale=2, lr_rate=8000, seed=0):
    rng = np.random.default_rng(seed)
    chunks = []
    for i in range(n_chunks):
        lr = WaveSignal(rng.standard_normal(lr_len) * 0.1, lr_rate)
        hr = WaveSignal(rng.standard_normal(scale * lr_len) * 0.1, scale * lr_rate)
        chunks.append(TrainChunk(lr=lr, hr=hr, offset=0))
    return chunks


class TestTrainStep:
    def test_spectral_only_leaves_discriminator_untouched(self):
        state = TrainState(tiny_config())
        before = {k: v.clone() for k, v in state.disc.state_dict().items()}
        train_step(state, make_dataset(2)[:2])
        after = state.disc.state_dict()
        assert all(torch.equal(before[k], after[k]) for k in before)

    def test_generator_changes(self):
        state = TrainState(tiny_config())
        before = {k: v.clone() for k, v in state.net.state_dict().items()}
        train_step(state, make_dataset(2)[:2])
        after = state.net.state_dict()
        assert any(not torch.equal(before[k], after[k]) for k in before)

    def test_adversarial_step_updates_discriminator(self):
        state = TrainState(tiny_config(weights=LossWeights(1, 1, 1)))
        before = {k: v.clone() for k, v in state.disc.state_dict().items()}
        train_step(state, make_dataset(2)[:2])
        after = state.disc.state_dict()
        assert any(not torch.equal(before[k], after[k]) for k in before)

    def test_empty_batch_rejected(self):
        state = TrainState(tiny_config())
        with pytest.raises(ValueError, match="non-empty"):
            train_step(state, [])

    def test_nonuniform_batch_rejected(self):
        state = TrainState(tiny_config())
        chunks = make_dataset(1, lr_len=1000) + make_dataset(1, lr_len=1200)
        with pytest.raises(ValueError, match="uniform"):
            train_step(state, chunks)

    def test_repeated_steps_reduce_spectral_loss(self):
        state = TrainState(tiny_config())
        batch = make_dataset(2)[:2]
        first = train_step(state, batch)
        for _ in range(48):
            report = train_step(state, batch)
        last = train_step(state, batch)
        total_first = first.spectral_sc + first.spectral_mag
        total_last = last.spectral_sc + last.spectral_mag
        assert total_last < total_first


class TestFit:
    def test_zero_steps_returns_initial(self):
        ckpt = fit(tiny_config(total_steps=0), make_dataset())
        assert ckpt.step == 0

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            fit(tiny_config(), [])

    def test_desk_run_writes_log_and_checkpoint(self, tmp_path):
        config = tiny_config(total_steps=6, ckpt_every=3, out_dir=str(tmp_path))
        ckpt = fit(config, make_dataset())
        assert ckpt.step == 6
        assert (tmp_path / "final.ckpt").exists()
        assert (tmp_path / "step_0000003.ckpt").exists()
        lines = (tmp_path / "train_log.jsonl").read_text().strip().splitlines()
        assert all("total_g" in json.loads(line) for line in lines)

    def test_seed_determinism(self, tmp_path):
        logs = []
        for run in ("a", "b"):
            out = tmp_path / run
            fit(tiny_config(total_steps=4, out_dir=str(out)), make_dataset())
            logs.append((out / "train_log.jsonl").read_text())
        assert logs[0] == logs[1]

    def test_resume_matches_uninterrupted(self, tmp_path):
        dataset = make_dataset()
        full = fit(tiny_config(total_steps=8), dataset)
        half = fit(tiny_config(total_steps=4), dataset)
        path = tmp_path / "half.ckpt"
        save_checkpoint(half, path)
        resumed = fit(tiny_config(total_steps=8), dataset, resume=str(path))
        for name in full.generator.arrays:
            np.testing.assert_allclose(
                resumed.generator.arrays[name], full.generator.arrays[name],
                rtol=1e-6, atol=1e-8, err_msg=name)


class TestCheckpointIO:
    def test_round_trip(self, tmp_path):
        ckpt = fit(tiny_config(total_steps=2), make_dataset())
        path = tmp_path / "ck.ckpt"
        save_checkpoint(ckpt, path)
        loaded = load_checkpoint(path)
        assert loaded.step == ckpt.step
        assert loaded.config == ckpt.config
        for name in ckpt.generator.arrays:
            assert np.array_equal(loaded.generator.arrays[name], ckpt.generator.arrays[name])
        for name in ckpt.discriminator:
            assert np.array_equal(loaded.discriminator[name], ckpt.discriminator[name])

    def test_truncated_file_errors(self, tmp_path):
        ckpt = fit(tiny_config(total_steps=1), make_dataset())
        path = tmp_path / "ck.ckpt"
        save_checkpoint(ckpt, path)
        data = path.read_bytes()
        path.write_bytes(data[:len(data) // 3])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(path)

    def test_unknown_key_warned_and_ignored(self, tmp_path):
        from specsr.checkpoint import save_container

        params = fit(tiny_config(total_steps=1), make_dataset()).generator
        path = tmp_path / "params.ckpt"
        save_container({
            "kind": "generator_params",
            "model_config": {f.name: getattr(params.config, f.name)
                             for f in __import__("dataclasses").fields(params.config)},
            "arrays": dict(params.arrays),
            "exotic_future_field": 123,
        }, path)
        with pytest.warns(UserWarning, match="exotic_future_field"):
            loaded = load_params(path)
        assert loaded.total_count() == params.total_count()

    def test_missing_file_errors(self):
        with pytest.raises(CheckpointError, match="exist"):
            load_checkpoint("/nonexistent/path.ckpt")

    def test_params_round_trip(self, tmp_path):
        params = fit(tiny_config(total_steps=1), make_dataset()).generator
        save_params(params, tmp_path / "g.ckpt")
        loaded = load_params(tmp_path / "g.ckpt")
        assert loaded.config == params.config
        for name in params.arrays:
            assert np.array_equal(loaded.arrays[name], params.arrays[name])
