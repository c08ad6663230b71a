from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from ..errors import FormatError, NumericError, ParameterError


@dataclass(frozen=True, eq=False)
class AudioSignal:
    """Mono samples in [-1, 1] at ``sample_rate`` Hz."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64).ravel()
        if not np.isfinite(x).all():
            raise NumericError("audio contains non-finite samples")
        if not self.sample_rate > 0:
            raise ParameterError(f"sample rate must be positive, got {self.sample_rate}")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def scaled(self, gain: float) -> "AudioSignal":
        return AudioSignal(self.samples * gain, self.sample_rate)


def read_wav(path) -> AudioSignal:
    """Read 16-bit PCM or 32-bit float WAV; stereo is averaged to mono."""
    try:
        rate, data = wavfile.read(path)
    except (ValueError, wave.Error) as exc:
        raise FormatError(f"{path}: unsupported or corrupt WAV ({exc})") from None
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        x = data.astype(np.float64)
    else:
        raise FormatError(f"{path}: unsupported sample format {data.dtype}")
    if x.ndim == 2:
        x = x.mean(axis=1)
    return AudioSignal(x, float(rate))


def write_wav(path, sig: AudioSignal, *, pcm16: bool = True) -> None:
    if pcm16:
        data = np.clip(np.round(sig.samples * 32768.0), -32768, 32767).astype(np.int16)
    else:
        data = sig.samples.astype(np.float32)
    wavfile.write(Path(path), int(round(sig.sample_rate)), data)
