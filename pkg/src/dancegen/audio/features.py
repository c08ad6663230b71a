from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CoverageError, DimensionError, ParameterError, ParseError
from ..numerics import SeededRng
from .signal import AudioSignal
from .spectral import (
    FRAME_HOP,
    FRAME_LEN,
    HIGH_BAND,
    HOP_S,
    LOW_BAND,
    WINDOW_S,
    pulse_clarity,
    stft,
    subband_flux_series,
)

FEATURE_NAMES = ("flux_low", "flux_high", "pulse_clarity")
CSV_HEADER = "time_s," + ",".join(FEATURE_NAMES)


class Provenance(str, enum.Enum):
    ORIGINAL = "original"
    SUBSTITUTED_SONG = "substituted_song"
    WHITE_NOISE = "white_noise"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True, eq=False)
class FeatureSeries:
    """Per-motion-frame ``(flux_low, flux_high, pulse_clarity)`` rows at ``rate`` Hz."""

    values: np.ndarray
    rate: float
    provenance: Provenance = Provenance.ORIGINAL

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise DimensionError(f"feature values must be (T, 3), got {v.shape}")
        if not np.isfinite(v).all():
            raise ParameterError("feature values must be finite")
        if (v[:, :2] < 0).any():
            raise ParameterError("flux values must be non-negative")
        if ((v[:, 2] < 0) | (v[:, 2] > 1)).any():
            raise ParameterError("pulse clarity must lie in [0, 1]")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, FeatureSeries)
            and self.rate == other.rate
            and self.provenance == other.provenance
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.rate


def extract_features(
    sig: AudioSignal,
    window_s: float = WINDOW_S,
    hop_s: float = HOP_S,
    frame_len: int = FRAME_LEN,
    frame_hop: int = FRAME_HOP,
):
    """Raw feature series at ``1 / hop_s`` Hz; returns ``(times, values)``."""
    spec = stft(sig, frame_len, frame_hop)
    times, low = subband_flux_series(spec, LOW_BAND, window_s, hop_s)
    _, high = subband_flux_series(spec, HIGH_BAND, window_s, hop_s)
    _, clarity = pulse_clarity(spec, window_s, hop_s)
    return times, np.column_stack([low, high, clarity])


def align_features(times, values, motion_rate: float, n_frames: int, provenance=Provenance.ORIGINAL) -> FeatureSeries:
    """Linearly interpolate a feature series onto motion-frame timestamps ``k / motion_rate``."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape != (times.size, 3):
        raise DimensionError(f"values {values.shape} do not match {times.size} timestamps")
    if n_frames < 1 or not motion_rate > 0:
        raise ParameterError("need a positive frame count and motion rate")
    last = (n_frames - 1) / motion_rate
    if times.size == 0 or times[0] > 1e-9 or times[-1] < last - 1e-9:
        span = (times[0], times[-1]) if times.size else (np.nan, np.nan)
        raise CoverageError(f"features span {span[0]:.3f}-{span[1]:.3f} s, motion needs 0-{last:.3f} s")
    t = np.arange(n_frames) / motion_rate
    out = np.column_stack([np.interp(t, times, values[:, c]) for c in range(3)])
    out[:, :2] = np.maximum(out[:, :2], 0.0)
    out[:, 2] = np.clip(out[:, 2], 0.0, 1.0)
    return FeatureSeries(out, motion_rate, provenance)


def features_for_motion(sig: AudioSignal, n_frames: int, motion_rate: float = 30.0, provenance=Provenance.ORIGINAL, **kw) -> FeatureSeries:
    times, values = extract_features(sig, **kw)
    return align_features(times, values, motion_rate, n_frames, provenance)


def white_noise_signal(duration_s: float, rng: SeededRng, sample_rate: float = 44100.0) -> AudioSignal:
    n = int(round(duration_s * sample_rate))
    return AudioSignal(rng.uniform(n, -1.0, 1.0), sample_rate)


def white_noise_features(
    duration_s: float,
    rng: SeededRng,
    sample_rate: float = 44100.0,
    n_frames: int | None = None,
    motion_rate: float = 30.0,
    window_s: float = WINDOW_S,
) -> FeatureSeries:
    """Features of uniform white noise in [-1, 1], aligned to ``n_frames``
    motion frames (default: every frame of ``duration_s``)."""
    if not duration_s > window_s:
        raise ParameterError(f"duration {duration_s} s must exceed the {window_s} s analysis window")
    if n_frames is None:
        n_frames = int(np.floor(duration_s * motion_rate + 1e-9))
    sig = white_noise_signal(duration_s, rng, sample_rate)
    return features_for_motion(sig, n_frames, motion_rate, Provenance.WHITE_NOISE, window_s=window_s)


def format_feature_csv(series: FeatureSeries) -> str:
    rows = [CSV_HEADER]
    for t, row in zip(series.times, series.values):
        rows.append(",".join(f"{v:.9g}" for v in (t, *row)))
    return "\n".join(rows) + "\n"


def write_feature_csv(path, series: FeatureSeries) -> None:
    Path(path).write_text(format_feature_csv(series), encoding="utf-8")


def read_feature_csv(path, provenance=Provenance.ORIGINAL) -> FeatureSeries:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ParseError(f"{path}: expected header {CSV_HEADER!r}")
    try:
        data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:] if ln.strip()], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 4 or data.shape[0] < 1:
        raise ParseError(f"{path}: expected rows of 4 values")
    rate = 1.0 / (data[1, 0] - data[0, 0]) if data.shape[0] > 1 else 30.0
    return FeatureSeries(data[:, 1:], round(rate, 6), provenance)
