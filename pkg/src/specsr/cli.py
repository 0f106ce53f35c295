"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime error. Every runtime failure
names the stage it happened in.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .audio import WaveSignal, read_wav, write_wav
from .data import (
    build_lr_cache,
    build_manifest,
    chunk_stream,
    make_lr_hr_pair,
    read_manifest,
    split_vctk,
    write_manifest,
)
from .inference import super_resolve
from .metrics import (
    evaluate_testset,
    format_results_table,
    write_results_csv,
)
from .model import ParameterSet
from .plots import render_eval_figure, render_spectrogram_image
from .resample import lowpass_filter, sinc_resample
from .train import fit, load_checkpoint, load_params, save_params


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")


def _load_config(args) -> cfgmod.RunConfig:
    try:
        run = cfgmod.load_run_config(args.config, getattr(args, "set", []) or [])
        return cfgmod.with_seed(run, getattr(args, "seed", None))
    except Exception as exc:
        raise StageError("config", exc) from exc


def _iter_audio_files(source: Path):
    if source.is_dir():
        yield from sorted(source.glob("**/*.wav"))
    else:
        yield source


def _load_generator(path: str) -> tuple[ParameterSet, object]:
    """Accepts either a training checkpoint or a generator-params container."""
    from .checkpoint import load_container

    kind = load_container(path).get("kind")
    if kind == "train_checkpoint":
        ckpt = load_checkpoint(path)
        return ckpt.generator, ckpt.config.transform()
    return load_params(path), None


def cmd_prepare(args) -> int:
    run = _load_config(args)
    out = Path(args.out)
    try:
        entries = build_manifest(args.data_root, args.pattern)
        if not entries:
            raise ValueError(f"no audio files under {args.data_root}")
        if args.split == "vctk":
            train, test = split_vctk(entries)
        else:
            train = test = entries
        write_manifest(train, out / "train_manifest.jsonl")
        write_manifest(test, out / "test_manifest.jsonl")
    except StageError:
        raise
    except Exception as exc:
        raise StageError("manifest", exc) from exc
    try:
        for name, split in (("train", train), ("test", test)):
            produced = build_lr_cache(split, args.data_root, out / "cache", run.pair)
            print(f"{name}: {len(split)} files, {len(produced)} lr/hr pairs cached")
    except Exception as exc:
        raise StageError("lr-cache", exc) from exc
    return 0


def _chunks_from_prepared(prepared: Path, run: cfgmod.RunConfig, manifest: str):
    entries = read_manifest(prepared / manifest)
    pairs = []
    for entry in entries:
        hr = read_wav(entry.path)
        rel = Path(entry.path).name
        lr_path = next((prepared / "cache" / f"lr_{run.pair.source_rate}").glob(f"**/{rel}"), None)
        if lr_path is None:
            lr, hr = make_lr_hr_pair(hr, run.pair)
        else:
            lr = read_wav(lr_path)
            hr = WaveSignal(hr.samples[:run.pair.scale * len(lr)], hr.sample_rate)
        pairs.append((lr, hr))
    return pairs


def cmd_train(args) -> int:
    run = _load_config(args)
    try:
        pairs = _chunks_from_prepared(Path(args.prepared), run, "train_manifest.jsonl")
        chunks = list(chunk_stream(pairs, run.train.chunk_seconds,
                                   run.train.chunk_hop_seconds, run.train.seed))
        if not chunks:
            raise ValueError("prepared dataset produced no chunks")
    except StageError:
        raise
    except Exception as exc:
        raise StageError("dataset", exc) from exc
    try:
        from dataclasses import replace

        train_cfg = replace(run.train, out_dir=args.out)
        ckpt = fit(train_cfg, chunks)
        save_params(ckpt.generator, Path(args.out) / "generator.ckpt")
        print(f"trained to step {ckpt.step}; checkpoints in {args.out}")
    except Exception as exc:
        raise StageError("train", exc) from exc
    return 0


def cmd_upsample(args) -> int:
    try:
        params, spec = _load_generator(args.checkpoint)
        if spec is None:
            run = _load_config(args)
            spec = run.train.transform()
    except StageError:
        raise
    except Exception as exc:
        raise StageError("checkpoint", exc) from exc
    src = Path(args.input)
    dst = Path(args.output)
    try:
        files = list(_iter_audio_files(src))
        if not files:
            raise ValueError(f"no input audio at {src}")
        for path in files:
            x = read_wav(path)
            y = super_resolve(params, x, spec)
            target = dst / path.name if src.is_dir() or dst.is_dir() else dst
            write_wav(target, y)
            print(f"{path} -> {target} ({x.sample_rate} -> {y.sample_rate} Hz)")
    except Exception as exc:
        raise StageError("upsample", exc) from exc
    return 0


def cmd_evaluate(args) -> int:
    run = _load_config(args)
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    try:
        pairs = _chunks_from_prepared(Path(args.prepared), run, "test_manifest.jsonl")
        named = [(f"file_{i:03d}", lr, hr) for i, (lr, hr) in enumerate(pairs)]
    except Exception as exc:
        raise StageError("dataset", exc) from exc
    try:
        if args.checkpoint:
            params, spec = _load_generator(args.checkpoint)
            spec = spec or run.train.transform()
            upsample = lambda lr_sig: super_resolve(params, lr_sig, spec)
        else:  # sinc baseline
            upsample = lambda lr_sig: sinc_resample(lr_sig, run.pair.target_rate)
        result = evaluate_testset(upsample, named, metrics=metrics, mode=args.mode,
                                  visqol_binary=args.visqol_bin)
    except Exception as exc:
        raise StageError("evaluate", exc) from exc
    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_results_csv(result, out / "results.csv")
        render_eval_figure(result, out / "results_lsd.png")
        table = format_results_table(result)
        (out / "results.txt").write_text(table + "\n")
        print(table)
    except Exception as exc:
        raise StageError("report", exc) from exc
    return 0


def cmd_baseline_sinc(args) -> int:
    src, dst = Path(args.input), Path(args.output)
    try:
        for path in _iter_audio_files(src):
            x = read_wav(path)
            y = sinc_resample(x, args.target_rate)
            target = dst / path.name if src.is_dir() or dst.is_dir() else dst
            write_wav(target, y)
            print(f"{path} -> {target}")
    except Exception as exc:
        raise StageError("baseline-sinc", exc) from exc
    return 0


def cmd_anchor(args) -> int:
    src, dst = Path(args.input), Path(args.output)
    try:
        for path in _iter_audio_files(src):
            x = read_wav(path)
            y = lowpass_filter(x, args.cutoff)
            target = dst / path.name if src.is_dir() or dst.is_dir() else dst
            write_wav(target, y)
            print(f"{path} -> {target} (low-passed at {args.cutoff} Hz)")
    except Exception as exc:
        raise StageError("anchor", exc) from exc
    return 0


def cmd_plot_spec(args) -> int:
    try:
        x = read_wav(args.input)
        out = render_spectrogram_image(x, args.output, fft_size=args.fft_size,
                                       hop_length=args.hop_length,
                                       title=Path(args.input).name)
        print(f"wrote {out}")
    except Exception as exc:
        raise StageError("plot-spec", exc) from exc
    return 0


def cmd_mushra_export(args) -> int:
    out = Path(args.out)
    audio_dir = out / "audio"
    try:
        systems = []
        for item in args.system:
            if "=" not in item:
                raise ValueError(f"--system expects name=dir, got {item!r}")
            name, root = item.split("=", 1)
            systems.append((name, Path(root)))
        references = sorted(Path(args.reference).glob("*.wav"))
        if not references:
            raise ValueError(f"no reference wavs in {args.reference}")
        items = []
        for ref_path in references:
            item_id = ref_path.stem
            ref = read_wav(ref_path)
            ref_out = audio_dir / f"{item_id}_reference.wav"
            write_wav(ref_out, ref)
            anchor_out = audio_dir / f"{item_id}_anchor.wav"
            write_wav(anchor_out, lowpass_filter(ref, args.anchor_cutoff))
            sys_entries = []
            for name, root in systems:
                candidate = root / ref_path.name
                if not candidate.exists():
                    raise ValueError(f"system {name!r} lacks output for {ref_path.name}")
                sys_out = audio_dir / f"{item_id}_{name}.wav"
                write_wav(sys_out, read_wav(candidate))
                sys_entries.append({"name": name,
                                    "path": str(sys_out.relative_to(out))})
            items.append({
                "id": item_id,
                "reference": str(ref_out.relative_to(out)),
                "anchor": str(anchor_out.relative_to(out)),
                "systems": sys_entries,
            })
        manifest = {"items": items, "scale": "0-100"}
        (out / "session_manifest.json").write_text(json.dumps(manifest, indent=2))
        print(f"exported {len(items)} items, {len(systems)} systems -> {out}")
    except Exception as exc:
        raise StageError("mushra-export", exc) from exc
    return 0


def build_parser() -> CliParser:
    parser = CliParser(prog="specsr",
                       description="Spectral-domain audio super-resolution toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if config:
            p.add_argument("--config", default="8-16_r4",
                           help="preset name or .ini path (default 8-16_r4)")
            p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                           help="override a config key, e.g. train.total_steps=100")

    p = sub.add_parser("prepare", help="build manifests, splits, and the LR cache")
    p.add_argument("--data-root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pattern", default="**/*.wav")
    p.add_argument("--split", choices=("vctk", "none"), default="vctk")
    add_common(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="run the optimization loop")
    p.add_argument("--prepared", required=True, help="output dir of `prepare`")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("upsample", help="super-resolve a file or directory")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--checkpoint", required=True)
    add_common(p)
    p.set_defaults(func=cmd_upsample)

    p = sub.add_parser("evaluate", help="LSD/ViSQOL table over the test split")
    p.add_argument("--prepared", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint", default=None,
                   help="generator checkpoint; omitted = sinc baseline")
    p.add_argument("--metrics", default="lsd", help="comma list: lsd,visqol")
    p.add_argument("--mode", choices=("speech", "audio"), default="speech")
    p.add_argument("--visqol-bin", default=None)
    add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline-sinc", help="sinc-interpolation baseline outputs")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--target-rate", type=int, required=True)
    add_common(p, config=False)
    p.set_defaults(func=cmd_baseline_sinc)

    p = sub.add_parser("anchor", help="low-pass anchor stimuli for listening tests")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--cutoff", type=float, default=3500.0)
    add_common(p, config=False)
    p.set_defaults(func=cmd_anchor)

    p = sub.add_parser("plot-spec", help="render a spectrogram image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--fft-size", type=int, default=1024)
    p.add_argument("--hop-length", type=int, default=256)
    add_common(p, config=False)
    p.set_defaults(func=cmd_plot_spec)

    p = sub.add_parser("mushra-export",
                       help="bundle reference/anchor/system audio + session manifest")
    p.add_argument("--reference", required=True, help="directory of reference wavs")
    p.add_argument("--system", action="append", default=[], metavar="NAME=DIR")
    p.add_argument("--anchor-cutoff", type=float, default=3500.0)
    p.add_argument("--out", required=True)
    add_common(p, config=False)
    p.set_defaults(func=cmd_mushra_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        np.random.seed(args.seed)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"specsr: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything unnamed is still a runtime failure
        print(f"specsr: [unexpected] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
