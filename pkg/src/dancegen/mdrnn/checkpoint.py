"""Binary checkpoint format.

Layout (all integers little-endian)::

    b"MDRN" | u32 version | u32 n | n bytes of UTF-8 JSON metadata
            | float64 blobs in manifest order | u32 CRC-32 of everything before

The JSON holds the model configuration, a manifest of ``[name, shape]``
pairs, and free-form training metadata.  Keys are sorted and separators
fixed, so saving a loaded checkpoint reproduces the original bytes.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import IntegrityError, VersionError
from ..mocap import NormStats
from .config import ModelConfig
from .model import check_weights, param_names

MAGIC = b"MDRN"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sII")
_CRC = struct.Struct("<I")


@dataclass(frozen=True, eq=False)
class Checkpoint:
    config: ModelConfig
    weights: dict
    motion_stats: NormStats | None = None
    feature_stats: NormStats | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        check_weights(self.config, self.weights)
        frozen = {}
        for name in param_names(self.config):
            w = np.array(self.weights[name], dtype=np.float64)
            w.flags.writeable = False
            frozen[name] = w
        object.__setattr__(self, "weights", frozen)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __eq__(self, other):
        return (
            isinstance(other, Checkpoint)
            and self.config == other.config
            and all(np.array_equal(self.weights[k], other.weights[k]) for k in self.weights)
            and self.motion_stats == other.motion_stats
            and self.feature_stats == other.feature_stats
            and self.metadata == other.metadata
        )

    __hash__ = None


def _blobs(ckpt: Checkpoint) -> list:
    items = [(name, ckpt.weights[name]) for name in param_names(ckpt.config)]
    for prefix, stats in (("motion_stats", ckpt.motion_stats), ("feature_stats", ckpt.feature_stats)):
        if stats is not None:
            items += [(f"{prefix}.minimum", stats.minimum), (f"{prefix}.maximum", stats.maximum)]
    return items


def checkpoint_bytes(ckpt: Checkpoint) -> bytes:
    blobs = _blobs(ckpt)
    meta = {
        "config": ckpt.config.to_dict(),
        "manifest": [[name, list(arr.shape)] for name, arr in blobs],
        "metadata": ckpt.metadata,
    }
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")
    body = b"".join(
        [_HEADER.pack(MAGIC, FORMAT_VERSION, len(meta_bytes)), meta_bytes]
        + [np.ascontiguousarray(arr, dtype="<f8").tobytes() for _, arr in blobs]
    )
    return body + _CRC.pack(zlib.crc32(body))


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    Path(path).write_bytes(checkpoint_bytes(ckpt))


def parse_checkpoint(data: bytes, config: ModelConfig | None = None) -> Checkpoint:
    """Decode checkpoint bytes.  With ``config`` given, every weight must match
    that configuration's shapes (a :class:`DimensionError` names the first
    tensor that does not)."""
    if len(data) < _HEADER.size + _CRC.size:
        raise IntegrityError(f"checkpoint is truncated ({len(data)} bytes)")
    body, (crc,) = data[: -_CRC.size], _CRC.unpack(data[-_CRC.size :])
    magic, version, meta_len = _HEADER.unpack_from(body)
    if magic != MAGIC:
        raise IntegrityError(f"bad magic {magic!r}, not a checkpoint")
    if zlib.crc32(body) != crc:
        raise IntegrityError("checkpoint checksum mismatch (corrupt or truncated file)")
    if version != FORMAT_VERSION:
        raise VersionError(f"checkpoint format version {version} is not supported (expected {FORMAT_VERSION})")
    try:
        meta = json.loads(body[_HEADER.size : _HEADER.size + meta_len].decode("utf-8"))
        stored = ModelConfig.from_dict(meta["config"])
        manifest = meta["manifest"]
    except (ValueError, KeyError, TypeError) as exc:
        raise IntegrityError(f"unreadable checkpoint metadata: {exc}") from None
    offset = _HEADER.size + meta_len
    arrays = {}
    for name, shape in manifest:
        count = int(np.prod(shape, dtype=np.int64))
        end = offset + 8 * count
        if end > len(body):
            raise IntegrityError(f"tensor {name!r} runs past the end of the file")
        arrays[name] = np.frombuffer(body[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
        offset = end
    if offset != len(body):
        raise IntegrityError(f"{len(body) - offset} unexpected trailing bytes")
    weights = {k: v for k, v in arrays.items() if not k.startswith(("motion_stats.", "feature_stats."))}
    check_weights(config if config is not None else stored, weights)

    def stats(prefix):
        if f"{prefix}.minimum" not in arrays:
            return None
        return NormStats(arrays[f"{prefix}.minimum"], arrays[f"{prefix}.maximum"])

    return Checkpoint(stored, weights, stats("motion_stats"), stats("feature_stats"), meta.get("metadata", {}))


def load_checkpoint(path, config: ModelConfig | None = None) -> Checkpoint:
    return parse_checkpoint(Path(path).read_bytes(), config)
