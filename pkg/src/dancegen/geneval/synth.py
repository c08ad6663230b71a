"""Synthetic "dances" whose movement amplitude follows a scalar control.

Every joint coordinate mixes a few shared latent oscillators around a
rest pose::

    s[t, k]    = sin(2 pi f[k] t / rate + phase[k])
    p[t, j, d] = rest[j, d] + c(t) * A[j, d] * (L[j, d, :] @ s[t] / sqrt(K) + nu * eps[t, j, d])

with ``eps`` i.i.d. standard normal.  The rest pose, amplitudes ``A``,
loadings ``L`` and frequencies ``f`` are the same for every recording;
phases and noise differ.  The
control ``c`` also sets the gain of a white-noise audio track, so the
sub-band flux extracted from that track is proportional to ``c`` and the
model can learn to read movement energy from the audio features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio import AudioSignal, FeatureSeries, Provenance, features_for_motion
from ..errors import ParameterError
from ..mocap import MotionSequence
from ..numerics import SeededRng


@dataclass(frozen=True)
class SynthSpec:
    n_recordings: int = 8
    duration_s: float = 40.0
    rate: float = 30.0
    n_joints: int = 22
    control_range: tuple = (0.1, 0.5)
    control_period_s: tuple = (12.0, 24.0)
    amplitude_range: tuple = (0.03, 0.08)
    frequency_range_hz: tuple = (0.3, 1.2)
    n_oscillators: int = 3
    noise_scale: float = 1.0
    sample_rate: float = 44100.0

    def __post_init__(self):
        if not self.duration_s > 0 or not self.rate > 0:
            raise ParameterError("duration and rate must be positive")
        if self.n_recordings < 1 or self.n_joints < 1 or self.n_oscillators < 1:
            raise ParameterError("need at least one recording and one joint")
        lo, hi = self.control_range
        if not 0 <= lo <= hi:
            raise ParameterError(f"control range must satisfy 0 <= lo <= hi, got {self.control_range}")

    @property
    def n_frames(self) -> int:
        return int(round(self.duration_s * self.rate))


@dataclass(frozen=True)
class SynthDataset:
    motions: list
    features: list
    controls: list
    spec: SynthSpec


def _choreography(rng: SeededRng, spec: SynthSpec):
    shape = (spec.n_joints, 3)
    rest = np.column_stack(
        [rng.uniform(spec.n_joints, -0.3, 0.3), rng.uniform(spec.n_joints, -0.3, 0.3), rng.uniform(spec.n_joints, 0.1, 1.7)]
    )
    amp = rng.uniform(shape, *spec.amplitude_range)
    loadings = rng.uniform(shape + (spec.n_oscillators,), -1.0, 1.0)
    freq = rng.uniform(spec.n_oscillators, *spec.frequency_range_hz)
    return rest, amp, loadings, freq


def synth_motion(control, rng: SeededRng, spec: SynthSpec = SynthSpec(), index: int = 0) -> MotionSequence:
    """Motion for a per-frame control curve.

    The choreography comes from ``rng.spawn("choreography")`` and the
    recording's phases and noise from ``rng.spawn(("recording", index))``,
    so the same ``rng`` and ``index`` with a scaled control give a motion
    whose offsets from the rest pose scale by the same factor.
    """
    c = np.asarray(control, dtype=np.float64)
    if c.ndim != 1 or c.size < 1:
        raise ParameterError("control must be a non-empty 1-D array")
    rest, amp, loadings, freq = _choreography(rng.spawn("choreography"), spec)
    rec = rng.spawn(("recording", index))
    phase = rec.uniform(spec.n_oscillators, 0.0, 2 * np.pi)
    noise = rec.normal((c.size, spec.n_joints, 3))
    t = np.arange(c.size)[:, None] / spec.rate
    latent = np.sin(2 * np.pi * freq * t + phase)  # (T, K)
    wave = latent @ loadings.transpose(0, 2, 1) / np.sqrt(spec.n_oscillators)
    wave = np.moveaxis(wave, 1, 0) + spec.noise_scale * noise
    frames = rest + c[:, None, None] * (amp * wave)
    return MotionSequence(frames, spec.rate, tuple(f"joint{j}" for j in range(spec.n_joints)))


def slow_control(n_frames: int, rng: SeededRng, spec: SynthSpec = SynthSpec()) -> np.ndarray:
    """Sinusoidal control sweeping the whole control range with a random period and phase."""
    lo, hi = spec.control_range
    period = rng.uniform(None, *spec.control_period_s)
    phase = rng.uniform(None, 0.0, 2 * np.pi)
    t = np.arange(n_frames) / spec.rate
    return lo + (hi - lo) * (0.5 + 0.5 * np.sin(2 * np.pi * t / period + phase))


def control_audio(control, rng: SeededRng, spec: SynthSpec = SynthSpec()) -> AudioSignal:
    """Uniform white noise whose gain follows the control, covering the motion's duration."""
    c = np.asarray(control, dtype=np.float64)
    n = int(round(c.size / spec.rate * spec.sample_rate))
    t = np.arange(n) / spec.sample_rate
    gain = np.interp(t, np.arange(c.size) / spec.rate, c)
    return AudioSignal(gain * rng.uniform(n, -1.0, 1.0), spec.sample_rate)


def control_features(control, rng: SeededRng, spec: SynthSpec = SynthSpec()) -> FeatureSeries:
    """Audio features of :func:`control_audio`, aligned to the control's frames."""
    sig = control_audio(control, rng, spec)
    return features_for_motion(sig, len(control), spec.rate, Provenance.SYNTHETIC)


def synth_dataset(spec: SynthSpec, rng: SeededRng) -> SynthDataset:
    """``spec.n_recordings`` recordings with slowly varying control."""
    motions, features, controls = [], [], []
    for i in range(spec.n_recordings):
        c = slow_control(spec.n_frames, rng.spawn(("control", i)), spec)
        motions.append(synth_motion(c, rng, spec, i))
        features.append(control_features(c, rng.spawn(("audio", i)), spec))
        controls.append(c)
    return SynthDataset(motions, features, controls, spec)


def synth_marker_motion(control, rng: SeededRng, rate: float = 240.0, n_markers: int = 43, index: int = 0) -> MotionSequence:
    """Raw marker-level recording for exercising the preprocessing chain.

    Markers sit at distinct rest positions and sway with a few smooth
    oscillations whose amplitude follows ``control``.  Any skeleton map over
    ``n_markers`` markers reduces it to non-degenerate joints.  The layout
    comes from ``rng`` alone and the oscillation phases from ``index``, so
    one ``rng`` with several indices gives recordings of the same "dancer".
    """
    c = np.asarray(control, dtype=np.float64)
    if c.ndim != 1 or c.size < 1:
        raise ParameterError("control must be a non-empty 1-D array")
    chor = rng.spawn("markers")
    rest = np.column_stack([chor.uniform(n_markers, -0.4, 0.4), chor.uniform(n_markers, -0.4, 0.4), chor.uniform(n_markers, 0.0, 1.8)])
    amp = chor.uniform((n_markers, 3), 0.02, 0.1)
    freq = chor.uniform(3, 0.3, 1.5)
    loadings = chor.uniform((n_markers, 3, 3), -1.0, 1.0)
    phase = rng.spawn(("marker-phase", index)).uniform(3, 0.0, 2 * np.pi)
    t = np.arange(c.size)[:, None] / rate
    latent = np.sin(2 * np.pi * freq * t + phase)  # (T, 3)
    wave = np.einsum("tk,mdk->tmd", latent, loadings)
    frames = rest + c[:, None, None] * amp * wave
    return MotionSequence(frames, rate, tuple(f"M{m + 1}" for m in range(n_markers)))
