"""Manifest, split, pairing, and chunking contracts."""
import numpy as np
import pytest

from specsr.audio import WaveSignal, write_wav
from specsr.data import (
    ManifestEntry,
    PairSpec,
    TrainChunk,
    build_manifest,
    chunk_stream,
    make_lr_hr_pair,
    read_manifest,
    split_vctk,
    write_manifest,
)


def synthetic_entry(speaker: str, mic: str = "mic1", n: int = 0) -> ManifestEntry:
    return ManifestEntry(path=f"{speaker}/{speaker}_{n:03d}_{mic}.wav",
                         duration_samples=48000, sample_rate=48000,
                         speaker_id=speaker, mic_id=mic)


class TestManifest:
    def test_empty_dir(self, tmp_path):
        assert build_manifest(tmp_path) == []

    def test_three_files_sorted(self, tmp_path):
        rng = np.random.default_rng(0)
        for name in ["c.wav", "a.wav", "b.wav"]:
            write_wav(tmp_path / name, WaveSignal(rng.standard_normal(100) * 0.1, 8000))
        entries = build_manifest(tmp_path, "*.wav")
        assert [e.path.split("/")[-1] for e in entries] == ["a.wav", "b.wav", "c.wav"]
        assert all(e.duration_samples == 100 for e in entries)

    def test_corrupt_file_skipped_with_warning(self, tmp_path):
        write_wav(tmp_path / "good.wav", WaveSignal(np.zeros(100) + 0.1, 8000))
        (tmp_path / "bad.wav").write_bytes(b"RIFFgarbage")
        with pytest.warns(UserWarning, match="bad.wav"):
            entries = build_manifest(tmp_path, "*.wav")
        assert len(entries) == 1

    def test_speaker_and_mic_parsed(self, tmp_path):
        write_wav(tmp_path / "p225_001_mic2.wav", WaveSignal(np.zeros(10) + 0.1, 48000))
        entries = build_manifest(tmp_path, "*.wav")
        assert entries[0].speaker_id == "p225"
        assert entries[0].mic_id == "mic2"

    def test_jsonl_round_trip(self, tmp_path):
        entries = [synthetic_entry("p225"), synthetic_entry("p226", "mic2")]
        write_manifest(entries, tmp_path / "manifest.jsonl")
        assert read_manifest(tmp_path / "manifest.jsonl") == entries


class TestVctkSplit:
    def make_corpus(self):
        speakers = [f"p{225 + i}" for i in range(110)]
        assert "p280" in speakers and "p315" in speakers
        entries = []
        for s in speakers:
            entries.append(synthetic_entry(s, "mic1", 1))
            entries.append(synthetic_entry(s, "mic1", 2))
            entries.append(synthetic_entry(s, "mic2", 1))
        return entries

    def test_100_train_8_test(self):
        train, test = split_vctk(self.make_corpus())
        train_ids = {e.speaker_id for e in train}
        test_ids = {e.speaker_id for e in test}
        assert len(train_ids) == 100 and len(test_ids) == 8

    def test_partition(self):
        train, test = split_vctk(self.make_corpus())
        train_ids = {e.speaker_id for e in train}
        test_ids = {e.speaker_id for e in test}
        assert train_ids & test_ids == set()
        assert len(train_ids | test_ids) == 108

    def test_omitted_speakers_absent(self):
        train, test = split_vctk(self.make_corpus())
        for e in train + test:
            assert e.speaker_id not in ("p280", "p315")

    def test_mic2_excluded(self):
        train, test = split_vctk(self.make_corpus())
        assert all(e.mic_id == "mic1" for e in train + test)

    def test_too_few_speakers_errors(self):
        entries = [synthetic_entry(f"p{225 + i}") for i in range(50)]
        with pytest.raises(ValueError, match="found 50"):
            split_vctk(entries)


class TestPairs:
    def test_12_to_48_lengths(self):
        y = WaveSignal(np.random.default_rng(0).standard_normal(48000) * 0.1, 48000)
        lr, hr = make_lr_hr_pair(y, PairSpec(12000, 48000))
        assert len(lr) == 12000
        assert len(hr) == 4 * len(lr)

    def test_musdb_rates(self):
        y = WaveSignal(np.random.default_rng(1).standard_normal(44100) * 0.1, 44100)
        lr, hr = make_lr_hr_pair(y, PairSpec(11025, 44100))
        assert len(lr) == len(y.samples) // 4

    def test_band_limited_below_source_nyquist(self):
        from scipy.signal.windows import tukey

        from specsr.resample import sinc_resample

        rng = np.random.default_rng(2)
        y = WaveSignal(rng.standard_normal(44100) * 0.1 * tukey(44100, 0.05), 44100)
        lr, _ = make_lr_hr_pair(y, PairSpec(11025, 44100))
        # viewed at the original rate, the pair's lr side has nothing above
        # the 5512.5 Hz source Nyquist
        back = sinc_resample(lr, 44100)
        spectrum = np.abs(np.fft.rfft(back.samples)) ** 2
        freqs = np.fft.rfftfreq(len(back), 1 / back.sample_rate)
        low = spectrum[freqs <= 5512.5].sum()
        # past the filter transition band (~1.1x Nyquist) nothing remains
        assert spectrum[freqs >= 6000].sum() < 1e-5 * low
        assert spectrum[freqs >= 6500].sum() < 1e-9 * low

    def test_idempotent_on_band_limited_input(self):
        from scipy.signal.windows import tukey

        from specsr.resample import sinc_resample

        # strictly band-limited content well inside the 4 kHz lr passband
        t = np.arange(32000) / 16000
        mix = sum(np.sin(2 * np.pi * f * t + p) for f, p in [(440, 0.0), (1200, 1.0), (2700, 2.0)])
        y = WaveSignal(mix * tukey(32000, 0.05) * 0.2, 16000)
        lr1, hr1 = make_lr_hr_pair(y, PairSpec(8000, 16000))
        rebuilt = sinc_resample(lr1, 16000)
        lr2, _ = make_lr_hr_pair(rebuilt, PairSpec(8000, 16000))
        err = np.linalg.norm(lr1.samples - lr2.samples) / np.linalg.norm(lr1.samples)
        assert err < 1e-3

    def test_wrong_rate_rejected(self):
        y = WaveSignal(np.ones(1000), 16000)
        with pytest.raises(ValueError, match="target"):
            make_lr_hr_pair(y, PairSpec(12000, 48000))

    def test_too_short_rejected(self):
        y = WaveSignal(np.ones(100), 48000)
        with pytest.raises(ValueError, match="shorter"):
            make_lr_hr_pair(y, PairSpec(12000, 48000))

    def test_non_integer_scale_rejected(self):
        with pytest.raises(ValueError):
            PairSpec(9000, 16000)

    @pytest.mark.parametrize("src,dst", [(8000, 16000), (8000, 24000), (4000, 16000),
                                         (11025, 44100), (12000, 48000)])
    def test_supported_settings(self, src, dst):
        assert PairSpec(src, dst).scale == dst // src


class TestChunking:
    def make_pair(self, seconds=2.0, lr_rate=8000, scale=2):
        rng = np.random.default_rng(9)
        lr = WaveSignal(rng.standard_normal(int(seconds * lr_rate)) * 0.1, lr_rate)
        hr = WaveSignal(rng.standard_normal(scale * len(lr)) * 0.1, scale * lr_rate)
        return lr, hr

    def test_chunk_count(self):
        chunks = list(chunk_stream([self.make_pair()], 0.5, 0.5, seed=0))
        assert len(chunks) == 4

    def test_alignment_invariant(self):
        for chunk in chunk_stream([self.make_pair()], 0.25, 0.1, seed=1):
            assert len(chunk.hr) == 2 * len(chunk.lr)
            assert chunk.offset % 2 == 0

    def test_deterministic_given_seed(self):
        a = [(c.offset, c.lr.samples[0]) for c in chunk_stream([self.make_pair()], 0.5, 0.25, 0)]
        b = [(c.offset, c.lr.samples[0]) for c in chunk_stream([self.make_pair()], 0.5, 0.25, 0)]
        assert a == b

    def test_misaligned_chunk_rejected(self):
        lr = WaveSignal(np.ones(100), 8000)
        hr = WaveSignal(np.ones(150), 16000)
        with pytest.raises(ValueError, match="hr length"):
            TrainChunk(lr=lr, hr=hr, offset=0)

    def test_chunk_longer_than_file_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            list(chunk_stream([self.make_pair(seconds=0.2)], 0.5, 0.5, seed=0))
