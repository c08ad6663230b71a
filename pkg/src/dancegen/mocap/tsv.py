"""Reader and writer for tab-separated motion-capture exports.

Layout::

    NO_OF_FRAMES    2
    NO_OF_MARKERS   2
    FREQUENCY       240
    MARKER_NAMES    head    toe
    0.1 0.2 0.3 1.0 1.1 1.2
    ...

Header lines start with an upper-case key; only ``FREQUENCY`` and
``MARKER_NAMES`` are required.  Each data row holds ``3M`` decimals in
meters (x, y, z per marker).
"""

from __future__ import annotations

import io
import re
from pathlib import Path

import numpy as np

from ..errors import ParseError, SchemaError
from .sequence import MotionSequence

_KEY = re.compile(r"^[A-Z][A-Z0-9_]*$")


def _locate_bad_cell(rows: list, first_line: int, width: int) -> None:
    for r, row in enumerate(rows):
        cells = row.split("\t")
        if len(cells) != width:
            raise ParseError(f"line {first_line + r}: expected {width} columns, found {len(cells)}")
        for c, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"line {first_line + r}, column {c + 1}: invalid coordinate {cell!r}"
                ) from None
            if not np.isfinite(v):
                raise ParseError(f"line {first_line + r}, column {c + 1}: non-finite coordinate")


def parse_mocap_tsv(path, expected_markers: int | None = None) -> MotionSequence:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    header: dict = {}
    start = 0
    for start, line in enumerate(lines):
        key, _, rest = line.partition("\t")
        if not _KEY.match(key):
            break
        header[key] = rest.split("\t") if rest else []
    else:
        start = len(lines)
    if "FREQUENCY" not in header or not header["FREQUENCY"]:
        raise SchemaError(f"{path}: header lacks FREQUENCY")
    if "MARKER_NAMES" not in header:
        raise SchemaError(f"{path}: header lacks MARKER_NAMES")
    try:
        rate = float(header["FREQUENCY"][0])
    except ValueError:
        raise SchemaError(f"{path}: FREQUENCY is not a number") from None
    names = [n for n in header["MARKER_NAMES"] if n]
    if expected_markers is not None and len(names) != expected_markers:
        raise SchemaError(f"{path}: {len(names)} markers, expected {expected_markers}")

    rows = [ln for ln in lines[start:] if ln.strip()]
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = 3 * len(names)
    try:
        data = np.loadtxt(io.StringIO("\n".join(rows)), delimiter="\t", dtype=np.float64, ndmin=2)
    except ValueError:
        data = None
    if data is None or data.shape[1] != width or not np.isfinite(data).all():
        _locate_bad_cell(rows, start + 1, width)
        raise ParseError(f"{path}: malformed data block")
    if "NO_OF_FRAMES" in header and header["NO_OF_FRAMES"]:
        declared = int(header["NO_OF_FRAMES"][0])
        if declared != data.shape[0]:
            raise SchemaError(f"{path}: header declares {declared} frames, found {data.shape[0]}")
    return MotionSequence(data.reshape(data.shape[0], len(names), 3), rate, names)


def format_mocap_tsv(seq: MotionSequence) -> str:
    """TSV text for ``seq``; floats use shortest round-trip repr, so parsing is exact."""
    out = [
        f"NO_OF_FRAMES\t{seq.n_frames}",
        f"NO_OF_MARKERS\t{seq.n_markers}",
        f"FREQUENCY\t{seq.rate:.17g}",
        "MARKER_NAMES\t" + "\t".join(seq.marker_names),
    ]
    for row in seq.flat().tolist():
        out.append("\t".join(map(repr, row)))
    return "\n".join(out) + "\n"


def write_mocap_tsv(path, seq: MotionSequence) -> None:
    Path(path).write_text(format_mocap_tsv(seq), encoding="utf-8")
