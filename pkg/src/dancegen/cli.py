"""``dancegen`` command line: preprocess, features, train, generate, eval, plot.

Settings come from command-line flags, then an optional ``--config`` file of
``key = value`` lines, then built-in defaults.  The seed falls back to the
``MDRNN_SEED`` environment variable before the default of 0.

Exit codes: 0 success, 1 failed ordering check (``eval --noise``),
2 configuration or validation error, 3 data or format error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .audio import Provenance, features_for_motion, read_feature_csv, read_wav, white_noise_features, write_feature_csv
from .errors import ConfigError, DancegenError, DataError, ParameterError
from .geneval import GenerationRun, Mode, build_window_dataset, jitter_metric, substitute_features, trajectory_plot
from .mdrnn import TrainSettings, count_params, load_checkpoint, profile_config, save_checkpoint, train
from .mocap import (
    DEFAULT_ROOT,
    HAND_TOE_JOINTS,
    N_MARKERS,
    load_skeleton_map,
    mean_segment_lengths,
    minmax_fit,
    parse_mocap_tsv,
    preprocess_recording,
    reduce_markers,
    center_on_root,
    split_dataset,
    window_count,
    write_mocap_tsv,
)
from .numerics import SeededRng

MANIFEST = "manifest.json"

# key -> (type, default)
CONFIG_KEYS = {
    "mocap_dir": (Path, None),
    "audio_dir": (Path, None),
    "output_dir": (Path, None),
    "skeleton": (Path, None),
    "cutoff": (float, 0.03),
    "downsample": (int, 8),
    "window": (int, 300),
    "hop": (int, 1),
    "train_frac": (float, 0.8),
    "val_frac": (float, 0.1),
    "holdout": (list, ()),
    "profile": (str, "small"),
    "learning_rate": (float, 1e-4),
    "batch_size": (int, 32),
    "patience": (int, 10),
    "max_epochs": (int, 100),
    "clip_norm": (float, 10.0),
    "min_delta": (float, 0.0),
    "seed": (int, None),
}


def _convert(key: str, raw: str):
    kind = CONFIG_KEYS[key][0]
    try:
        if kind is list:
            return tuple(s.strip() for s in raw.split(",") if s.strip())
        if kind is int:
            return int(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot read {raw!r} as {kind.__name__}") from None


def parse_config(text: str, source: str = "<config>") -> dict:
    """Strict ``key = value`` parser; ``#`` starts a comment, unknown keys are errors."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = _convert(key, value)
    return out


def _settings(args) -> dict:
    """Merge flags over config file over defaults."""
    config = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        config = parse_config(path.read_text(encoding="utf-8"), str(path))
    merged = {}
    for key, (_, default) in CONFIG_KEYS.items():
        flag = getattr(args, key, None)
        merged[key] = flag if flag is not None else config.get(key, default)
    if merged["seed"] is None:
        env = os.environ.get("MDRNN_SEED")
        try:
            merged["seed"] = int(env) if env not in (None, "") else 0
        except ValueError:
            raise ConfigError(f"MDRNN_SEED must be an integer, got {env!r}") from None
    return merged


def _require_dir(path, what: str) -> Path:
    if path is None:
        raise ConfigError(f"{what} is required")
    path = Path(path)
    if not path.is_dir():
        raise ConfigError(f"{what} {path} does not exist")
    return path


def _require_file(path, what: str) -> Path:
    if path is None:
        raise ConfigError(f"{what} is required")
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{what} {path} does not exist")
    return path


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _staged(name: str, stage: str, exc: DancegenError) -> DancegenError:
    return type(exc)(f"{name}: stage {stage}: {exc}")


def _load_manifest(data_dir: Path) -> dict:
    path = data_dir / MANIFEST
    if not path.is_file():
        raise ConfigError(f"{data_dir} has no {MANIFEST}; run 'dancegen preprocess' first")
    return json.loads(path.read_text(encoding="utf-8"))


# -- preprocess ----------------------------------------------------------------------


def cmd_preprocess(args) -> int:
    s = _settings(args)
    mocap_dir = _require_dir(s["mocap_dir"], "mocap directory")
    if s["output_dir"] is None:
        raise ConfigError("output directory is required")
    out = Path(s["output_dir"])
    skeleton = load_skeleton_map(_require_file(s["skeleton"], "skeleton map") if s["skeleton"] else None)
    expected = None if s["skeleton"] else N_MARKERS
    files = sorted(mocap_dir.glob("*.tsv"))
    if not files:
        raise DataError(f"no .tsv recordings in {mocap_dir}")
    raw = {}
    for path in files:
        try:
            raw[path.stem] = parse_mocap_tsv(path, expected)
        except DancegenError as exc:
            raise _staged(path.stem, "parse", exc) from None
    joints = {}
    for name, seq in raw.items():
        try:
            joints[name] = reduce_markers(center_on_root(seq, DEFAULT_ROOT), skeleton)
        except DancegenError as exc:
            raise _staged(name, "reduce", exc) from None
    target = mean_segment_lengths(list(joints.values()), skeleton)
    processed = {}
    for name, seq in raw.items():
        try:
            processed[name] = preprocess_recording(seq, skeleton, DEFAULT_ROOT, target, s["cutoff"], s["downsample"])
        except DancegenError as exc:
            raise _staged(name, "preprocess", exc) from None
    names = sorted(processed)
    split = split_dataset(names, s["train_frac"], s["val_frac"], s["holdout"], SeededRng(s["seed"]).spawn("split"))
    assignment = {n: part for part in ("train", "val", "test", "holdout") for n in getattr(split, part)}
    (out / "motion").mkdir(parents=True, exist_ok=True)
    stats = minmax_fit([processed[n].flat() for n in split.train]) if split.train else None
    recordings = []
    for name in names:
        seq = processed[name]
        write_mocap_tsv(out / "motion" / f"{name}.tsv", seq)
        recordings.append(
            {
                "name": name,
                "frames": seq.n_frames,
                "rate": seq.rate,
                "split": assignment[name],
                "windows": window_count(seq.n_frames, s["window"], s["hop"]),
            }
        )
    if stats is not None:
        _write_json(out / "motion_stats.json", {"minimum": stats.minimum.tolist(), "maximum": stats.maximum.tolist()})
    manifest = {
        "version": __version__,
        "seed": s["seed"],
        "parameters": {"cutoff": s["cutoff"], "downsample": s["downsample"], "window": s["window"], "hop": s["hop"]},
        "recordings": recordings,
        "total_training_windows": sum(r["windows"] for r in recordings if r["split"] == "train"),
    }
    _write_json(out / MANIFEST, manifest)
    print(f"preprocessed {len(names)} recordings into {out}")
    for r in recordings:
        print(f"  {r['name']}: {r['frames']} frames at {r['rate']:g} Hz, {r['split']}, {r['windows']} windows")
    return 0


# -- features ------------------------------------------------------------------------------


def cmd_features(args) -> int:
    s = _settings(args)
    rate = args.rate
    if args.white_noise is not None:
        if args.output is None:
            raise ConfigError("--white-noise needs --output")
        series = white_noise_features(args.white_noise, SeededRng(s["seed"]).spawn("white-noise"), n_frames=args.frames, motion_rate=rate)
        write_feature_csv(args.output, series)
        print(f"wrote {len(series)} white-noise feature rows to {args.output}")
        return 0
    if args.audio is not None:
        if args.output is None:
            raise ConfigError("--audio needs --output")
        sig = read_wav(_require_file(args.audio, "audio file"))
        frames = args.frames if args.frames is not None else int(np.floor(sig.duration * rate + 1e-9))
        series = features_for_motion(sig, frames, rate)
        write_feature_csv(args.output, series)
        print(f"wrote {len(series)} feature rows to {args.output}")
        return 0
    data_dir = _require_dir(args.data or s["output_dir"], "preprocessed data directory")
    audio_dir = _require_dir(s["audio_dir"], "audio directory")
    manifest = _load_manifest(data_dir)
    (data_dir / "features").mkdir(exist_ok=True)
    for rec in manifest["recordings"]:
        wav = audio_dir / f"{rec['name']}.wav"
        if not wav.is_file():
            raise DataError(f"{rec['name']}: no stimulus {wav}")
        try:
            series = features_for_motion(read_wav(wav), rec["frames"], rec["rate"])
        except DancegenError as exc:
            raise _staged(rec["name"], "features", exc) from None
        write_feature_csv(data_dir / "features" / f"{rec['name']}.csv", series)
        print(f"  {rec['name']}: {len(series)} rows")
    return 0


# -- train --------------------------------------------------------------------------------------


def _train_settings(s: dict) -> TrainSettings:
    return TrainSettings(
        learning_rate=s["learning_rate"],
        batch_size=s["batch_size"],
        patience=s["patience"],
        max_epochs=s["max_epochs"],
        seed=s["seed"],
        clip_norm=s["clip_norm"],
        min_delta=s["min_delta"],
    )


def cmd_train(args) -> int:
    s = _settings(args)
    settings = _train_settings(s)
    if args.dry_run:
        config = profile_config(s["profile"])
        print(f"profile {s['profile']}: {count_params(config)} parameters (input {config.input_dim}, "
              f"LSTM {list(config.lstm_units)}, {config.mixtures} components over {config.output_dim} dims)")
        return 0
    data_dir = _require_dir(args.data or s["output_dir"], "preprocessed data directory")
    manifest = _load_manifest(data_dir)
    window, hop = manifest["parameters"]["window"], manifest["parameters"]["hop"]
    motions, features, train_idx, val_idx = [], [], [], []
    for rec in manifest["recordings"]:
        if rec["split"] not in ("train", "val"):
            continue
        feat_path = data_dir / "features" / f"{rec['name']}.csv"
        if not feat_path.is_file():
            raise DataError(f"{rec['name']}: missing features {feat_path}; run 'dancegen features' first")
        (train_idx if rec["split"] == "train" else val_idx).append(len(motions))
        motions.append(parse_mocap_tsv(data_dir / "motion" / f"{rec['name']}.tsv"))
        features.append(read_feature_csv(feat_path))
    if not train_idx or not val_idx:
        raise ConfigError("training needs at least one training and one validation recording")
    dataset = build_window_dataset(motions, features, train_idx, val_idx, window, hop)
    dim = motions[0].flat().shape[1]
    config = profile_config(s["profile"], input_dim=dim + 3, output_dim=dim)
    ckpt_path = Path(args.checkpoint) if args.checkpoint else data_dir / "model.mdrn"
    log_path = Path(args.log) if args.log else data_dir / "train_log.csv"
    print(f"training {s['profile']} profile ({count_params(config)} parameters) on "
          f"{len(dataset.train)} windows, validating on {len(dataset.val)}")

    def report(r):
        print(f"  epoch {r.epoch:3d}  train {r.train_nll:10.4f}  val {r.val_nll:10.4f}  {r.seconds:6.1f}s", flush=True)

    result = train(dataset, config, settings, log_path=log_path, on_epoch=report)
    save_checkpoint(ckpt_path, result.checkpoint)
    print(f"best epoch {result.best_epoch} (val {result.checkpoint.metadata['best_val_nll']:.4f}); saved {ckpt_path}")
    return 0


# -- generate --------------------------------------------------------------------------------------


def cmd_generate(args) -> int:
    s = _settings(args)
    ckpt = load_checkpoint(_require_file(args.checkpoint, "checkpoint"))
    primer = parse_mocap_tsv(_require_file(args.primer, "primer"))
    substitute = args.substitute or "none"
    if args.features is None and substitute != "whitenoise":
        raise ConfigError("--features is required unless --substitute whitenoise")
    if args.features is not None:
        feats = read_feature_csv(_require_file(args.features, "feature file"))
    else:
        feats = None
    if substitute == "whitenoise":
        noise = white_noise_features(primer.duration, SeededRng(s["seed"]).spawn("white-noise"), n_frames=primer.n_frames, motion_rate=primer.rate)
        feats = feats or noise
    elif substitute == "csv":
        if args.substitute_csv is None:
            raise ConfigError("--substitute csv needs --substitute-csv")
    run = GenerationRun(ckpt, primer, feats, s["seed"], args.pi_temp, args.sigma_temp, Mode(args.mode), args.length)
    if substitute == "whitenoise":
        run = substitute_features(run, noise)
    elif substitute == "csv":
        replacement = read_feature_csv(_require_file(args.substitute_csv, "substitute feature file"), Provenance.SUBSTITUTED_SONG)
        run = substitute_features(run, replacement)
    out = run.run()
    output = Path(args.output)
    write_mocap_tsv(output, out)
    meta = dict(run.metadata, substitute=substitute, checkpoint=Path(args.checkpoint).name, primer=Path(args.primer).name, frames=out.n_frames)
    _write_json(output.with_suffix(".json"), meta)
    print(f"wrote {out.n_frames} frames to {output} (features: {meta['feature_provenance']}, seed {s['seed']})")
    return 0


# -- eval and plot -------------------------------------------------------------------------------------


def cmd_eval(args) -> int:
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    scores = {}
    for path in args.inputs:
        report = jitter_metric(parse_mocap_tsv(_require_file(path, "motion file")))
        scores[path] = report.mean_displacement
        target = (out_dir / f"{Path(path).stem}.jitter.json") if out_dir else Path(path).with_suffix(".jitter.json")
        report.write(target)
        print(f"{path}: mean displacement {report.mean_displacement:.6g}, mean acceleration {report.mean_acceleration:.6g} -> {target}")
    if args.noise is not None:
        if args.noise not in scores:
            raise ConfigError(f"--noise {args.noise} must be one of the inputs")
        others = [v for k, v in scores.items() if k != args.noise]
        if others and not scores[args.noise] > max(others):
            print(f"ordering check failed: {args.noise} is not the most jittery condition", file=sys.stderr)
            return 1
        print(f"ordering check passed: {args.noise} has the largest mean displacement")
    return 0


def cmd_plot(args) -> int:
    seq = parse_mocap_tsv(_require_file(args.input, "motion file"))
    try:
        joints = [int(j) for j in args.joints.split(",")] if args.joints else list(HAND_TOE_JOINTS)
    except ValueError:
        raise ParameterError(f"--joints must be comma-separated integers, got {args.joints!r}") from None
    path = trajectory_plot(seq, joints, args.output, args.axis, title=Path(args.input).stem)
    print(f"wrote {path}")
    return 0


# -- parser --------------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file (unknown keys are rejected)")
    common.add_argument("--seed", type=int, help="root seed (default: $MDRNN_SEED, else 0)")

    parser = argparse.ArgumentParser(prog="dancegen", description="Audio-conditioned dance generation pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", parents=[common], help="mocap TSVs -> skeleton motion, stats and split manifest")
    p.add_argument("--mocap-dir", dest="mocap_dir", help="directory of raw marker TSV recordings")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("--skeleton", help="marker-to-joint map (default: bundled 43-marker map)")
    p.add_argument("--cutoff", type=float, help="Butterworth cutoff as a fraction of Nyquist (default 0.03)")
    p.add_argument("--downsample", type=int, help="keep every n-th frame (default 8)")
    p.add_argument("--window", type=int, help="training window length in frames (default 300)")
    p.add_argument("--hop", type=int, help="stride between windows (default 1)")
    p.add_argument("--train-frac", dest="train_frac", type=float, help="fraction of recordings for training (default 0.8)")
    p.add_argument("--val-frac", dest="val_frac", type=float, help="fraction for validation (default 0.1)")
    p.add_argument("--holdout", type=lambda v: tuple(x for x in v.split(",") if x), help="comma-separated recordings kept out of every split")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("features", parents=[common], help="audio -> per-frame flux and pulse-clarity CSVs")
    p.add_argument("--data", help="preprocessed directory; writes features/<name>.csv for each recording")
    p.add_argument("--audio-dir", dest="audio_dir", help="stimuli named <recording>.wav")
    p.add_argument("--audio", help="single WAV file to analyse (with --output)")
    p.add_argument("--white-noise", dest="white_noise", type=float, metavar="SECONDS", help="features of seeded white noise of this length")
    p.add_argument("--frames", type=int, help="number of motion frames to align to")
    p.add_argument("--rate", type=float, default=30.0, help="motion frame rate in Hz (default 30)")
    p.add_argument("--output", help="output CSV for --audio or --white-noise")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", parents=[common], help="train the mixture-density LSTM")
    p.add_argument("--data", help="preprocessed directory with features")
    p.add_argument("--profile", choices=["small", "paper"], help="layer sizes: small [64,32,16] or paper [1024,512,256]")
    p.add_argument("--dry-run", action="store_true", help="print the parameter count and exit")
    p.add_argument("--lr", dest="learning_rate", type=float, help="Adam learning rate (default 1e-4)")
    p.add_argument("--batch-size", dest="batch_size", type=int, help="windows per batch (default 32)")
    p.add_argument("--patience", type=int, help="epochs without improvement before stopping (default 10)")
    p.add_argument("--max-epochs", dest="max_epochs", type=int, help="epoch limit (default 100)")
    p.add_argument("--clip-norm", dest="clip_norm", type=float, help="global gradient-norm limit (default 10)")
    p.add_argument("--min-delta", dest="min_delta", type=float, help="minimum validation improvement (default 0)")
    p.add_argument("--checkpoint", help="output checkpoint (default <data>/model.mdrn)")
    p.add_argument("--log", help="training log CSV (default <data>/train_log.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", parents=[common], help="primed or free-running generation")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--primer", required=True, help="skeleton motion TSV at the model frame rate")
    p.add_argument("--features", help="feature CSV aligned to the primer")
    p.add_argument("--substitute", choices=["none", "whitenoise", "csv"], help="replace the primer's features")
    p.add_argument("--substitute-csv", dest="substitute_csv", help="replacement features for --substitute csv")
    p.add_argument("--pi-temp", dest="pi_temp", type=float, default=1.0, help="component temperature (0 = heaviest)")
    p.add_argument("--sigma-temp", dest="sigma_temp", type=float, default=1.0, help="scale temperature (0 = mean)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="primed")
    p.add_argument("--length", type=int, default=0, help="frames to generate in autoregressive mode")
    p.add_argument("--output", required=True, help="output motion TSV; metadata goes next to it as .json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="jitter reports for motion TSVs")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out-dir", dest="out_dir", help="where to write <name>.jitter.json (default: next to inputs)")
    p.add_argument("--noise", help="input expected to be the most jittery; exit 1 if it is not")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="trajectory strip as SVG")
    p.add_argument("input")
    p.add_argument("--joints", help="comma-separated joint indices (default: hands and toes)")
    p.add_argument("--axis", type=int, default=2, choices=[0, 1, 2], help="coordinate to plot (default 2, vertical)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DancegenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
