"""Motion preprocessing: skeleton reduction, centring, retargeting, smoothing,
decimation, min-max scaling and training-window extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from ..errors import DegeneratePoseError, DimensionError, LengthError, MapError, ParameterError
from ..numerics import SeededRng
from .sequence import MotionSequence
from .skeleton import RootSpec, SkeletonMap

FILTER_ORDER = 2
# Reflected edge padding of 3x the filter order; filtfilt needs T > padlen.
FILTER_PADLEN = 3 * FILTER_ORDER
MIN_SMOOTH_FRAMES = FILTER_PADLEN + 1


def reduce_markers(seq: MotionSequence, skeleton: SkeletonMap) -> MotionSequence:
    """Each joint becomes the weighted average of its source markers."""
    W = skeleton.weight_matrix(seq.n_markers)
    joints = np.einsum("jm,tmd->tjd", W, seq.frames)
    return MotionSequence(joints, seq.rate, skeleton.names)


def root_trajectory(seq: MotionSequence, root: RootSpec) -> np.ndarray:
    idx = np.asarray(root.indices)
    if idx.max() >= seq.n_markers or idx.min() < 0:
        raise MapError(f"root indices {root.indices} out of range for {seq.n_markers} markers")
    return np.einsum("m,tmd->td", np.asarray(root.weights), seq.frames[:, idx, :])


def center_on_root(seq: MotionSequence, root: RootSpec) -> MotionSequence:
    """Subtract the per-frame root point from every marker."""
    r = root_trajectory(seq, root)
    return seq.with_frames(seq.frames - r[:, None, :])


def bone_lengths(seq: MotionSequence, skeleton: SkeletonMap) -> np.ndarray:
    """``(T, J)`` distance of each joint to its parent; the root column is 0."""
    lengths = np.zeros((seq.n_frames, skeleton.n_joints))
    for parent, child in skeleton.edges():
        lengths[:, child] = np.linalg.norm(seq.frames[:, child] - seq.frames[:, parent], axis=1)
    return lengths


def mean_segment_lengths(sequences, skeleton: SkeletonMap) -> np.ndarray:
    """Per-joint bone length averaged over frames, then over the given sequences.

    Pass one sequence per performer to weight performers equally.
    """
    per_seq = [bone_lengths(s, skeleton).mean(axis=0) for s in sequences]
    if not per_seq:
        raise ParameterError("need at least one sequence")
    return np.mean(per_seq, axis=0)


def retarget_segment_lengths(seq: MotionSequence, skeleton: SkeletonMap, target_lengths) -> MotionSequence:
    """Rescale every bone to ``target_lengths[child]`` keeping its direction.

    ``target_lengths`` is indexed by child joint; the root entry is ignored.
    The root stays where it is and the tree is rebuilt outward from it.
    """
    target = np.asarray(target_lengths, dtype=float)
    if target.shape != (skeleton.n_joints,):
        raise DimensionError(f"need {skeleton.n_joints} target lengths, got {target.shape}")
    if seq.n_markers != skeleton.n_joints:
        raise DimensionError(f"sequence has {seq.n_markers} points, skeleton {skeleton.n_joints}")
    src = seq.frames
    out = np.empty_like(src)
    root = skeleton.root
    out[:, root] = src[:, root]
    for parent, child in skeleton.edges():
        if not target[child] > 0:
            raise ParameterError(f"target length for joint {child} must be positive")
        bone = src[:, child] - src[:, parent]
        norm = np.linalg.norm(bone, axis=1)
        bad = np.flatnonzero(norm < 1e-12)
        if bad.size:
            raise DegeneratePoseError(f"zero-length bone at frame {bad[0]}, joint {child}")
        out[:, child] = out[:, parent] + bone * (target[child] / norm)[:, None]
    return seq.with_frames(out)


def butterworth_smooth(seq: MotionSequence, normalized_cutoff: float = 0.03) -> MotionSequence:
    """Zero-phase 2nd-order low-pass Butterworth filter along time.

    ``normalized_cutoff`` is a fraction of the Nyquist rate (0.03 at 240 Hz is
    3.6 Hz).  The filter runs forward then backward, so the magnitude
    response is squared (0.5 at the cutoff) and there is no phase lag.
    Sequences need at least ``MIN_SMOOTH_FRAMES`` (7) frames.
    """
    if not 0.0 < normalized_cutoff < 1.0:
        raise ParameterError(f"normalized cutoff must lie in (0, 1), got {normalized_cutoff}")
    if seq.n_frames < MIN_SMOOTH_FRAMES:
        raise LengthError(f"smoothing needs at least {MIN_SMOOTH_FRAMES} frames, got {seq.n_frames}")
    b, a = signal.butter(FILTER_ORDER, normalized_cutoff, btype="low")
    smoothed = signal.filtfilt(b, a, seq.frames, axis=0, padtype="odd", padlen=FILTER_PADLEN)
    return seq.with_frames(smoothed)


def downsample(seq: MotionSequence, factor: int) -> MotionSequence:
    """Keep every ``factor``-th frame; a trailing partial group is dropped."""
    if int(factor) != factor or factor < 1:
        raise ParameterError(f"downsample factor must be a positive integer, got {factor}")
    factor = int(factor)
    n = seq.n_frames // factor
    if n < 1:
        raise LengthError(f"{seq.n_frames} frames cannot be downsampled by {factor}")
    return seq.with_frames(seq.frames[: n * factor : factor], rate=seq.rate / factor)


def preprocess_recording(
    seq: MotionSequence,
    skeleton: SkeletonMap,
    root: RootSpec,
    target_lengths=None,
    normalized_cutoff: float = 0.03,
    factor: int = 8,
) -> MotionSequence:
    """Full chain for one raw marker recording: centre, reduce, retarget,
    smooth and downsample."""
    joints = reduce_markers(center_on_root(seq, root), skeleton)
    if target_lengths is not None:
        joints = retarget_segment_lengths(joints, skeleton, target_lengths)
    return downsample(butterworth_smooth(joints, normalized_cutoff), factor)


# -- normalisation ---------------------------------------------------------------


@dataclass(frozen=True)
class NormStats:
    """Per-channel minimum and maximum."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.array(self.minimum, dtype=np.float64).ravel()
        hi = np.array(self.maximum, dtype=np.float64).ravel()
        if lo.shape != hi.shape:
            raise DimensionError("minimum and maximum must have the same length")
        if (hi < lo).any():
            raise ParameterError("maximum must be >= minimum for every channel")
        lo.flags.writeable = hi.flags.writeable = False
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)

    @property
    def channels(self) -> int:
        return self.minimum.size

    def __eq__(self, other):
        return (
            isinstance(other, NormStats)
            and np.array_equal(self.minimum, other.minimum)
            and np.array_equal(self.maximum, other.maximum)
        )

    __hash__ = None


def _as_channels(x) -> np.ndarray:
    if isinstance(x, MotionSequence):
        return x.flat()
    x = np.asarray(x, dtype=np.float64)
    return x.reshape(x.shape[0], -1) if x.ndim > 2 else x


def minmax_fit(sequences) -> NormStats:
    """Channel-wise range over all frames of the given (training) sequences."""
    blocks = [_as_channels(s) for s in sequences]
    if not blocks:
        raise ParameterError("minmax_fit needs at least one sequence")
    data = np.concatenate(blocks, axis=0)
    return NormStats(data.min(axis=0), data.max(axis=0))


def _check_width(x: np.ndarray, stats: NormStats) -> None:
    if x.shape[-1] != stats.channels:
        raise DimensionError(f"data has {x.shape[-1]} channels, stats have {stats.channels}")


def minmax_apply(x, stats: NormStats) -> np.ndarray:
    """Map each channel onto [0, 1] of the fitted range; constant channels map to 0.5."""
    x = _as_channels(x)
    _check_width(x, stats)
    span = stats.maximum - stats.minimum
    flat = span == 0
    out = (x - stats.minimum) / np.where(flat, 1.0, span)
    out[..., flat] = 0.5
    return out


def minmax_invert(x, stats: NormStats) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    _check_width(x, stats)
    span = stats.maximum - stats.minimum
    return x * span + stats.minimum


# -- windows and splits --------------------------------------------------------------


@dataclass(frozen=True)
class TrainingWindow:
    """``inputs[t]`` is frame ``start + t``; ``targets[t]`` the motion of frame ``start + t + 1``."""

    inputs: np.ndarray
    targets: np.ndarray
    start: int = 0

    def __post_init__(self):
        n, d = self.targets.shape
        if self.inputs.shape[0] != n or self.inputs.shape[1] < d:
            raise DimensionError(f"inputs {self.inputs.shape} incompatible with targets {self.targets.shape}")
        if not np.array_equal(self.targets[:-1], self.inputs[1:, :d]):
            raise ParameterError("targets are not the one-frame-shifted motion channels")

    @property
    def length(self) -> int:
        return self.targets.shape[0]


def window_count(n_frames: int, window: int, hop: int) -> int:
    return max(0, (n_frames - window) // hop)


def make_windows(data, motion_dim: int, window: int = 300, hop: int = 1) -> list:
    """Overlapping windows of ``(T, C)`` input frames whose first ``motion_dim``
    channels are motion.  Window ``w`` starts at ``w * hop``; there are
    ``floor((T - window) / hop)`` of them.  Windows are views into ``data``.
    """
    data = np.asarray(data, dtype=np.float64)
    if window < 1 or hop < 1:
        raise ParameterError(f"window and hop must be >= 1, got {window}, {hop}")
    if data.ndim != 2 or data.shape[1] < motion_dim:
        raise DimensionError(f"expected (T, >= {motion_dim}) frames, got {data.shape}")
    if data.shape[0] < window + 1:
        raise LengthError(f"need at least {window + 1} frames for a {window}-frame window, got {data.shape[0]}")
    windows = []
    for w in range(window_count(data.shape[0], window, hop)):
        s = w * hop
        win = TrainingWindow(data[s : s + window], data[s + 1 : s + window + 1, :motion_dim], s)
        # last target lies outside the input slice; check it against the source
        if not np.array_equal(win.targets[-1], data[s + window, :motion_dim]):
            raise ParameterError("window target does not match the source frame")
        windows.append(win)
    return windows


@dataclass(frozen=True)
class DatasetSplit:
    train: list
    val: list
    test: list
    holdout: list


def split_dataset(recordings, train_frac: float = 0.8, val_frac: float = 0.1, holdout=(), rng=None) -> DatasetSplit:
    """Whole-recording split.  Held-out recordings are removed first; the rest
    is shuffled and cut into ``floor(train_frac * n)`` training and
    ``floor(val_frac * n)`` validation recordings, the remainder going to
    ``test``.
    """
    for name, frac in (("train_frac", train_frac), ("val_frac", val_frac)):
        if not 0.0 < frac <= 1.0:
            raise ParameterError(f"{name} must lie in (0, 1], got {frac}")
    if train_frac + val_frac > 1.0 + 1e-12:
        raise ParameterError("train_frac + val_frac exceeds 1")
    recordings = list(recordings)
    held = [r for r in recordings if r in holdout]
    missing = [h for h in holdout if h not in recordings]
    if missing:
        raise ParameterError(f"holdout recordings not found: {missing}")
    pool = [r for r in recordings if r not in holdout]
    rng = rng if rng is not None else SeededRng(0)
    order = rng.permutation(len(pool))
    pool = [pool[i] for i in order]
    n_train = math.floor(train_frac * len(pool) + 1e-9)
    n_val = math.floor(val_frac * len(pool) + 1e-9)
    return DatasetSplit(
        train=pool[:n_train],
        val=pool[n_train : n_train + n_val],
        test=pool[n_train + n_val :],
        holdout=held,
    )
