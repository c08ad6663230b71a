"""Short-time spectra, sub-band spectral flux and entropy-based pulse clarity.

Outer analysis windows are centred on ``i * hop_s`` for
``i = 0 .. floor(duration / hop_s)`` and gather every inner STFT frame whose
centre lies in ``[centre - window_s/2, centre + window_s/2)``.  Windows near
the ends of the signal are therefore truncated rather than padded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LengthError, ParameterError
from .signal import AudioSignal

FRAME_LEN = 2048
FRAME_HOP = 1024
WINDOW_S = 5.0
HOP_S = 0.08
LOW_BAND = (50.0, 100.0)
HIGH_BAND = (3200.0, 6400.0)


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """``(frames, bins)`` Hann-windowed STFT magnitudes."""

    magnitudes: np.ndarray
    frame_hop_seconds: float
    bin_hz: float
    frame_len: int
    sample_rate: float
    signal_duration: float | None = None

    @property
    def n_frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.magnitudes.shape[1]) * self.bin_hz

    @property
    def frame_times(self) -> np.ndarray:
        """Centre time of each frame in seconds."""
        half = 0.5 * self.frame_len / self.sample_rate
        return np.arange(self.n_frames) * self.frame_hop_seconds + half

    @property
    def duration(self) -> float:
        """Length of the analysed signal (frames cover it up to one hop short)."""
        if self.signal_duration is not None:
            return self.signal_duration
        return (self.n_frames - 1) * self.frame_hop_seconds + self.frame_len / self.sample_rate


def hann(n: int) -> np.ndarray:
    """Periodic Hann window (exact for overlap-add at 50 % hop)."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def stft(sig: AudioSignal, frame_len: int = FRAME_LEN, hop: int = FRAME_HOP) -> Spectrogram:
    if frame_len < 2 or frame_len & (frame_len - 1):
        raise ParameterError(f"frame length must be a power of two, got {frame_len}")
    if hop < 1:
        raise ParameterError(f"hop must be >= 1, got {hop}")
    x = sig.samples
    if x.size < frame_len:
        raise LengthError(f"signal of {x.size} samples is shorter than one {frame_len}-sample frame")
    n = 1 + (x.size - frame_len) // hop
    frames = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop][:n]
    mags = np.abs(np.fft.rfft(frames * hann(frame_len), axis=1))
    return Spectrogram(
        mags, hop / sig.sample_rate, sig.sample_rate / frame_len, frame_len, sig.sample_rate, sig.duration
    )


def spectral_energy(spec: Spectrogram) -> np.ndarray:
    """Per-frame energy of the windowed frame, recovered from the one-sided
    spectrum by Parseval's relation."""
    m2 = spec.magnitudes**2
    w = np.full(m2.shape[1], 2.0)
    w[0] = 1.0
    if spec.frame_len % 2 == 0:
        w[-1] = 1.0
    return (m2 * w).sum(axis=1) / spec.frame_len


def band_bins(spec: Spectrogram, lo_hz: float, hi_hz: float) -> np.ndarray:
    nyquist = spec.sample_rate / 2.0
    if not 0.0 <= lo_hz < hi_hz <= nyquist:
        raise ParameterError(f"band [{lo_hz}, {hi_hz}] Hz must satisfy 0 <= lo < hi <= {nyquist}")
    f = spec.frequencies
    bins = np.flatnonzero((f >= lo_hz) & (f <= hi_hz))
    if bins.size == 0:
        raise ParameterError(f"band [{lo_hz}, {hi_hz}] Hz contains no bins at {spec.bin_hz:.3f} Hz resolution")
    return bins


def _rectified_flux(mags: np.ndarray) -> np.ndarray:
    rise = np.maximum(np.diff(mags, axis=0), 0.0)
    return np.concatenate([[0.0], np.sqrt((rise * rise).sum(axis=1))])


def band_flux(spec: Spectrogram, lo_hz: float, hi_hz: float) -> np.ndarray:
    """Euclidean norm of the half-wave rectified magnitude increase within the band.

    Frame 0 has no predecessor and is assigned 0.
    """
    return _rectified_flux(spec.magnitudes[:, band_bins(spec, lo_hz, hi_hz)])


def onset_curve(spec: Spectrogram) -> np.ndarray:
    """Full-band rectified flux, the onset strength used for pulse clarity."""
    return _rectified_flux(spec.magnitudes)


def clarity_from_energy(energy) -> float:
    """``1 - H(p) / ln N`` for the energy distribution ``p`` over ``N`` bins.

    Uniform energy gives 0, energy in a single bin gives 1.  An all-zero
    distribution is defined as 0.
    """
    e = np.asarray(energy, dtype=np.float64)
    n = e.size
    total = e.sum()
    if n < 2 or not total > 0:
        return 0.0
    p = e[e > 0] / total
    h = -float(np.sum(p * np.log(p)))
    return float(np.clip(1.0 - h / np.log(n), 0.0, 1.0))


def onset_energy_distribution(onsets: np.ndarray) -> np.ndarray:
    """Power spectrum (DC excluded) of a mean-removed, Hann-tapered onset segment."""
    o = np.asarray(onsets, dtype=np.float64)
    o = (o - o.mean()) * hann(o.size)
    return np.abs(np.fft.rfft(o))[1:] ** 2


def analysis_windows(spec: Spectrogram, window_s: float = WINDOW_S, hop_s: float = HOP_S):
    """Centre times and ``(start, stop)`` inner-frame ranges of the outer windows."""
    if not window_s > 0 or not hop_s > 0:
        raise ParameterError("window and hop must be positive")
    if spec.duration < window_s:
        raise LengthError(f"spectrogram spans {spec.duration:.3f} s, shorter than the {window_s} s window")
    centres = np.arange(int(np.floor(spec.duration / hop_s + 1e-9)) + 1) * hop_s
    t = spec.frame_times
    starts = np.searchsorted(t, centres - window_s / 2.0, side="left")
    stops = np.searchsorted(t, centres + window_s / 2.0, side="left")
    return centres, starts, stops


def pulse_clarity(spec: Spectrogram, window_s: float = WINDOW_S, hop_s: float = HOP_S):
    """Clarity per outer window; returns ``(centre_times, values)``."""
    centres, starts, stops = analysis_windows(spec, window_s, hop_s)
    onsets = onset_curve(spec)
    values = np.array(
        [clarity_from_energy(onset_energy_distribution(onsets[a:b])) if b - a >= 4 else 0.0 for a, b in zip(starts, stops)]
    )
    return centres, values


def subband_flux_series(spec, band, window_s: float = WINDOW_S, hop_s: float = HOP_S):
    """Mean band flux over the inner frames of each outer window; ``(centre_times, values)``.

    ``spec`` may also be an :class:`AudioSignal`, analysed with the default framing.
    """
    if isinstance(spec, AudioSignal):
        spec = stft(spec)
    centres, starts, stops = analysis_windows(spec, window_s, hop_s)
    flux = band_flux(spec, *band)
    csum = np.concatenate([[0.0], np.cumsum(flux)])
    counts = np.maximum(stops - starts, 1)
    values = (csum[stops] - csum[starts]) / counts
    values[stops == starts] = 0.0
    return centres, values
