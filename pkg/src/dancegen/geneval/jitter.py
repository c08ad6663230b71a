from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import LengthError
from ..mocap import MotionSequence


@dataclass(frozen=True)
class JitterReport:
    """Frame-to-frame variation of a motion sequence, in its own units.

    ``per_joint`` holds one dict per joint with ``joint``, ``name``,
    ``mean_displacement``, ``mean_acceleration`` and ``path_length``.
    """

    mean_displacement: float
    mean_acceleration: float
    per_joint: tuple

    def to_dict(self) -> dict:
        return {
            "mean_displacement": self.mean_displacement,
            "mean_acceleration": self.mean_acceleration,
            "per_joint": [dict(j) for j in self.per_joint],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @property
    def path_lengths(self) -> np.ndarray:
        return np.array([j["path_length"] for j in self.per_joint])


def jitter_metric(seq: MotionSequence) -> JitterReport:
    """Mean per-frame displacement and second-difference (acceleration)
    magnitude, overall and per joint, plus per-joint path length."""
    if seq.n_frames < 3:
        raise LengthError(f"jitter needs at least 3 frames, got {seq.n_frames}")
    p = seq.frames
    disp = np.linalg.norm(np.diff(p, axis=0), axis=2)  # (T-1, J)
    acc = np.linalg.norm(p[2:] - 2.0 * p[1:-1] + p[:-2], axis=2)  # (T-2, J)
    per_joint = tuple(
        {
            "joint": j,
            "name": seq.marker_names[j],
            "mean_displacement": float(disp[:, j].mean()),
            "mean_acceleration": float(acc[:, j].mean()),
            "path_length": float(disp[:, j].sum()),
        }
        for j in range(seq.n_markers)
    )
    return JitterReport(float(disp.mean()), float(acc.mean()), per_joint)
