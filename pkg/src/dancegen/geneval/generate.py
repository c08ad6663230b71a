"""Primed and free-running generation from a trained checkpoint."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

from ..audio import FeatureSeries
from ..errors import AlignmentError, CoverageError, DimensionError, LengthError, ParameterError, VersionError
from ..mdrnn import Checkpoint, forward_step, initial_state, sample_mixture
from ..mocap import MotionSequence, NormStats, minmax_apply, minmax_invert
from ..numerics import SeededRng


class Mode(str, enum.Enum):
    PRIMED = "primed"
    AUTOREGRESSIVE = "autoregressive"


def _normalise(x: np.ndarray, stats: NormStats | None, what: str) -> np.ndarray:
    if stats is None:
        return np.asarray(x, dtype=np.float64)
    if x.shape[-1] != stats.channels:
        raise VersionError(f"checkpoint {what} statistics cover {stats.channels} channels, data has {x.shape[-1]}")
    return minmax_apply(x, stats)


def _denormalise(x: np.ndarray, stats: NormStats | None) -> np.ndarray:
    return np.asarray(x, dtype=np.float64) if stats is None else minmax_invert(x, stats)


def model_inputs(ckpt: Checkpoint, motion: MotionSequence, features: FeatureSeries) -> np.ndarray:
    """Normalised ``(T, motion + 3)`` network inputs."""
    if len(features) != motion.n_frames:
        raise AlignmentError(f"{len(features)} feature rows for {motion.n_frames} motion frames")
    if features.rate != motion.rate:
        raise AlignmentError(f"features at {features.rate} Hz, motion at {motion.rate} Hz")
    x = np.hstack(
        [_normalise(motion.flat(), ckpt.motion_stats, "motion"), _normalise(features.values, ckpt.feature_stats, "feature")]
    )
    if x.shape[1] != ckpt.config.input_dim:
        raise DimensionError(f"inputs have {x.shape[1]} channels, the model expects {ckpt.config.input_dim}")
    return x


def _check_temps(pi_temp: float, sigma_temp: float) -> None:
    if pi_temp < 0 or sigma_temp < 0:
        raise ParameterError(f"temperatures must be >= 0, got pi_temp={pi_temp}, sigma_temp={sigma_temp}")


def generate_primed(
    ckpt: Checkpoint,
    primer: MotionSequence,
    features: FeatureSeries,
    rng: SeededRng,
    pi_temp: float = 1.0,
    sigma_temp: float = 1.0,
) -> MotionSequence:
    """Predict every next frame from the ground-truth primer.

    At step ``t`` the network sees primer frame ``t`` and features ``t``;
    the sampled output is the generated version of frame ``t + 1``.  States
    run through the whole primer, so the output has ``T - 1`` frames.
    """
    _check_temps(pi_temp, sigma_temp)
    x = model_inputs(ckpt, primer, features)
    cfg, w = ckpt.config, ckpt.weights
    state = initial_state(cfg)
    out = np.empty((max(primer.n_frames - 1, 0), cfg.output_dim))
    for t in range(out.shape[0]):
        params, state = forward_step(cfg, w, x[t], state)
        out[t] = sample_mixture(params, rng, pi_temp, sigma_temp)
    return primer.with_frames(_denormalise(out, ckpt.motion_stats).reshape(out.shape[0], -1, 3))


def generate_autoregressive(
    ckpt: Checkpoint,
    seed_frames: MotionSequence,
    features: FeatureSeries,
    rng: SeededRng,
    length: int,
    pi_temp: float = 1.0,
    sigma_temp: float = 1.0,
) -> MotionSequence:
    """Consume the seed frames, then feed each sample back as the next input.

    ``features`` supplies one row per input step and must therefore have at
    least ``seed_frames.n_frames + length - 1`` rows.
    """
    _check_temps(pi_temp, sigma_temp)
    n_seed = seed_frames.n_frames
    if n_seed < 1:
        raise LengthError("autoregressive generation needs at least one seed frame")
    if length < 0:
        raise ParameterError(f"length must be >= 0, got {length}")
    cfg, w = ckpt.config, ckpt.weights
    if length == 0:
        return seed_frames.with_frames(np.zeros((0, seed_frames.n_markers, 3)))
    needed = n_seed + length - 1
    if len(features) < needed:
        raise CoverageError(f"{len(features)} feature rows, generation needs {needed}")
    feats = _normalise(features.values[:needed], ckpt.feature_stats, "feature")
    seed = _normalise(seed_frames.flat(), ckpt.motion_stats, "motion")
    state = initial_state(cfg)
    for t in range(n_seed - 1):
        _, state = forward_step(cfg, w, np.concatenate([seed[t], feats[t]]), state)
    out = np.empty((length, cfg.output_dim))
    frame = seed[-1]
    for i in range(length):
        params, state = forward_step(cfg, w, np.concatenate([frame, feats[n_seed - 1 + i]]), state)
        frame = out[i] = sample_mixture(params, rng, pi_temp, sigma_temp)
    return seed_frames.with_frames(_denormalise(out, ckpt.motion_stats).reshape(length, -1, 3))


@dataclass(frozen=True, eq=False)
class GenerationRun:
    """Everything that determines one generated sequence."""

    checkpoint: Checkpoint
    primer: MotionSequence
    features: FeatureSeries
    seed: int = 0
    pi_temp: float = 1.0
    sigma_temp: float = 1.0
    mode: Mode = Mode.PRIMED
    length: int = 0

    def run(self) -> MotionSequence:
        rng = SeededRng(self.seed)
        if Mode(self.mode) is Mode.PRIMED:
            return generate_primed(self.checkpoint, self.primer, self.features, rng, self.pi_temp, self.sigma_temp)
        return generate_autoregressive(
            self.checkpoint, self.primer, self.features, rng, self.length, self.pi_temp, self.sigma_temp
        )

    @property
    def metadata(self) -> dict:
        return {
            "seed": self.seed,
            "pi_temp": self.pi_temp,
            "sigma_temp": self.sigma_temp,
            "mode": Mode(self.mode).value,
            "feature_provenance": self.features.provenance.value,
            "primer_frames": self.primer.n_frames,
        }


def substitute_features(run: GenerationRun, replacement: FeatureSeries) -> GenerationRun:
    """The same run with only the three feature channels swapped.

    The replacement must cover the primer; extra rows are dropped.
    """
    needed = len(run.features)
    if replacement.rate != run.features.rate:
        raise AlignmentError(f"replacement features at {replacement.rate} Hz, run uses {run.features.rate} Hz")
    if len(replacement) < needed:
        raise CoverageError(f"replacement has {len(replacement)} rows, the run needs {needed}")
    trimmed = FeatureSeries(replacement.values[:needed], replacement.rate, replacement.provenance)
    return dataclasses.replace(run, features=trimmed)
