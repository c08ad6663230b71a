"""Dataset assembly and the desk-scale conditioning experiment on synthetic dances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..audio import FeatureSeries, white_noise_features
from ..errors import AlignmentError, ParameterError
from ..mdrnn import ModelConfig, TrainResult, TrainSettings, WindowDataset, profile_config, train
from ..mocap import make_windows, minmax_apply, minmax_fit
from ..numerics import SeededRng
from .generate import generate_primed
from .jitter import jitter_metric
from .synth import SynthSpec, control_features, synth_dataset


def recording_inputs(motion, features, motion_stats, feature_stats) -> np.ndarray:
    if len(features) != motion.n_frames:
        raise AlignmentError(f"{len(features)} feature rows for {motion.n_frames} motion frames")
    return np.hstack([minmax_apply(motion.flat(), motion_stats), minmax_apply(features.values, feature_stats)])


def build_window_dataset(motions, features, train_idx, val_idx, window: int, hop: int) -> WindowDataset:
    """Normalise with training-split statistics and cut overlapping windows."""
    train_idx, val_idx = list(train_idx), list(val_idx)
    if not train_idx or not val_idx:
        raise ParameterError("need at least one training and one validation recording")
    motion_stats = minmax_fit([motions[i].flat() for i in train_idx])
    feature_stats = minmax_fit([features[i].values for i in train_idx])
    motion_dim = motions[0].flat().shape[1]

    def windows(indices):
        out = []
        for i in indices:
            out += make_windows(recording_inputs(motions[i], features[i], motion_stats, feature_stats), motion_dim, window, hop)
        return out

    return WindowDataset(windows(train_idx), windows(val_idx), motion_stats, feature_stats)


@dataclass(frozen=True)
class ToySetup:
    spec: SynthSpec = SynthSpec()
    n_train: int = 6
    n_val: int = 1
    window: int = 60
    hop: int = 10
    profile: str = "small"
    settings: TrainSettings = TrainSettings(learning_rate=1e-2, batch_size=16, max_epochs=30, patience=10, seed=0)
    data_seed: int = 2024


@dataclass
class ToyModel:
    setup: ToySetup
    result: TrainResult
    data: object
    config: ModelConfig
    test_index: int = field(default=-1)

    @property
    def checkpoint(self):
        return self.result.checkpoint


def train_toy_model(setup: ToySetup = ToySetup(), on_epoch=None) -> ToyModel:
    """Generate synthetic dances, train on the first recordings and keep the last as test."""
    spec = setup.spec
    if setup.n_train + setup.n_val >= spec.n_recordings:
        raise ParameterError("leave at least one synthetic recording for testing")
    data = synth_dataset(spec, SeededRng(setup.data_seed))
    train_idx = range(setup.n_train)
    val_idx = range(setup.n_train, setup.n_train + setup.n_val)
    dataset = build_window_dataset(data.motions, data.features, train_idx, val_idx, setup.window, setup.hop)
    config = profile_config(setup.profile, input_dim=3 * spec.n_joints + 3, output_dim=3 * spec.n_joints)
    result = train(dataset, config, setup.settings, on_epoch=on_epoch)
    return ToyModel(setup, result, data, config, spec.n_recordings - 1)


def constant_control_features(level: float, n_frames: int, rng: SeededRng, spec: SynthSpec) -> FeatureSeries:
    return control_features(np.full(n_frames, float(level)), rng, spec)


def conditioning_ratio(toy: ToyModel, seed: int = 0, primer_frames: int = 600) -> dict:
    """Prime with a held-out recording under constant high and constant low
    control features and compare the generated per-joint path lengths."""
    spec = toy.setup.spec
    primer = toy.data.motions[toy.test_index]
    primer = primer.with_frames(primer.frames[:primer_frames])
    lo, hi = spec.control_range
    feats = {
        level: constant_control_features(level, primer.n_frames, SeededRng(seed).spawn(("audio", level)), spec)
        for level in (lo, hi)
    }
    paths = {
        level: jitter_metric(generate_primed(toy.checkpoint, primer, f, SeededRng(seed).spawn("sampling"))).path_lengths
        for level, f in feats.items()
    }
    ratios = paths[hi] / paths[lo]
    return {"ratios": ratios, "min_ratio": float(ratios.min()), "mean_ratio": float(ratios.mean())}


def substitution_jitter(toy: ToyModel, seed: int, primer_frames: int = 600) -> dict:
    """Mean displacement of primed generations with the held-out recording's
    own features versus white-noise features; same primer and sampling seed."""
    spec = toy.setup.spec
    motion = toy.data.motions[toy.test_index]
    rng = SeededRng(seed)
    start = int(rng.spawn("offset").integers(motion.n_frames - primer_frames + 1))
    primer = motion.with_frames(motion.frames[start : start + primer_frames])
    original = toy.data.features[toy.test_index]
    original = FeatureSeries(original.values[start : start + primer_frames], original.rate, original.provenance)
    noise = white_noise_features(primer_frames / spec.rate, rng.spawn("noise"), spec.sample_rate, primer_frames, spec.rate)
    out = {}
    for name, feats in (("original", original), ("white_noise", noise)):
        seq = generate_primed(toy.checkpoint, primer, feats, rng.spawn("sampling"))
        out[name] = jitter_metric(seq).mean_displacement
    return out
