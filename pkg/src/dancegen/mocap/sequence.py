from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, NumericError, ParameterError


@dataclass(frozen=True, eq=False)
class MotionSequence:
    """Time-major marker or joint positions.

    ``frames`` has shape ``(T, M, 3)`` in meters (``T`` may be 0); ``rate``
    is frames per second.  Marker names default to ``m0 .. m{M-1}``.
    """

    frames: np.ndarray
    rate: float
    marker_names: tuple = field(default=())

    def __post_init__(self):
        frames = np.array(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[2] != 3:
            raise DimensionError(f"frames must have shape (T, M, 3), got {frames.shape}")
        if not np.isfinite(frames).all():
            raise NumericError("motion sequence contains non-finite positions")
        if not self.rate > 0:
            raise ParameterError(f"frame rate must be positive, got {self.rate}")
        names = tuple(self.marker_names) or tuple(f"m{i}" for i in range(frames.shape[1]))
        if len(names) != frames.shape[1]:
            raise DimensionError(f"{len(names)} marker names for {frames.shape[1]} markers")
        frames.flags.writeable = False
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "marker_names", names)

    def __eq__(self, other):
        return (
            isinstance(other, MotionSequence)
            and self.rate == other.rate
            and self.marker_names == other.marker_names
            and np.array_equal(self.frames, other.frames)
        )

    __hash__ = None

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_markers(self) -> int:
        return self.frames.shape[1]

    @property
    def duration(self) -> float:
        return self.n_frames / self.rate

    def flat(self) -> np.ndarray:
        """``(T, 3M)`` channel view, ordered x, y, z per marker."""
        return self.frames.reshape(self.n_frames, -1)

    @classmethod
    def from_flat(cls, data, rate: float, marker_names=()) -> "MotionSequence":
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] % 3:
            raise DimensionError(f"flat motion data must be (T, 3M), got {data.shape}")
        return cls(data.reshape(data.shape[0], -1, 3), rate, marker_names)

    def with_frames(self, frames, rate: float | None = None) -> "MotionSequence":
        return MotionSequence(frames, self.rate if rate is None else rate, self.marker_names)
