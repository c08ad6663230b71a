"""Joint trajectories over time as a standalone SVG strip."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..errors import LengthError, ParameterError
from ..mocap import MotionSequence

WIDTH, HEIGHT = 1200, 300
MARGIN = 20
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def trajectory_svg(seq: MotionSequence, joints, axis: int = 2, title: str = "") -> str:
    """Time runs left to right; ``axis`` (0 = x, 1 = y, 2 = z) is plotted
    upwards.  All polylines share one vertical scale; a constant signal sits
    on the centre line."""
    joints = [int(j) for j in joints]
    if not joints:
        raise ParameterError("select at least one joint")
    bad = [j for j in joints if not 0 <= j < seq.n_markers]
    if bad:
        raise ParameterError(f"joint indices {bad} out of range for {seq.n_markers} joints")
    if axis not in (0, 1, 2):
        raise ParameterError(f"axis must be 0, 1 or 2, got {axis}")
    if seq.n_frames < 1:
        raise LengthError("cannot plot an empty sequence")
    values = seq.frames[:, joints, axis]  # (T, n)
    lo, hi = float(values.min()), float(values.max())
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    t = np.arange(seq.n_frames)
    xs = MARGIN + (t / max(seq.n_frames - 1, 1)) * plot_w
    if hi > lo:
        ys = MARGIN + (hi - values) / (hi - lo) * plot_h
    else:
        ys = np.full(values.shape, HEIGHT / 2.0)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{escape(title)}</title>" if title else "<title>joint trajectories</title>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    for k, j in enumerate(joints):
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys[:, k]))
        colour = PALETTE[k % len(PALETTE)]
        name = escape(seq.marker_names[j], {'"': "&quot;"})
        lines.append(f'<polyline data-joint="{j}" data-name="{name}" fill="none" stroke="{colour}" stroke-width="1" points="{pts}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def trajectory_plot(seq: MotionSequence, joints, path, axis: int = 2, title: str = "") -> Path:
    path = Path(path)
    path.write_text(trajectory_svg(seq, joints, axis, title), encoding="utf-8")
    return path
