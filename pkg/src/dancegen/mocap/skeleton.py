from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import MapError, ParseError

N_JOINTS = 22
N_MARKERS = 43
MOTION_DIM = 3 * N_JOINTS

# Joints traced in trajectory plots: both hands and both toes.
HAND_TOE_JOINTS = (16, 20, 4, 8)


@dataclass(frozen=True)
class RootSpec:
    """Weighted average of markers that defines the root point."""

    indices: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.indices) != len(w) or len(w) == 0:
            raise MapError("root spec needs one weight per marker index")
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
            raise MapError("root weights must be non-negative and sum to 1")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @classmethod
    def equal(cls, indices) -> "RootSpec":
        indices = tuple(indices)
        return cls(indices, tuple([1.0 / len(indices)] * len(indices)))


# Markers 41, 42, 6 and 7 in 1-based capture numbering, equal weights.
DEFAULT_ROOT = RootSpec.equal((40, 41, 5, 6))


@dataclass(frozen=True)
class SkeletonMap:
    """Marker-to-joint reduction plus the kinematic tree over the joints.

    ``joints[j]`` is a tuple of ``(marker_index, weight)`` pairs with 0-based
    marker indices; ``parents[j]`` is the parent joint or -1 for the root.
    """

    joints: tuple
    parents: tuple
    names: tuple = ()

    def __post_init__(self):
        joints = tuple(tuple((int(m), float(w)) for m, w in j) for j in self.joints)
        parents = tuple(int(p) for p in self.parents)
        if len(joints) != len(parents) or not joints:
            raise MapError("need one parent entry per joint")
        for j, pairs in enumerate(joints):
            if not pairs:
                raise MapError(f"joint {j} has no source markers")
            w = np.array([p[1] for p in pairs])
            if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
                raise MapError(f"joint {j}: weights must be non-negative and sum to 1")
            if any(m < 0 for m, _ in pairs):
                raise MapError(f"joint {j}: negative marker index")
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "names", tuple(self.names) or tuple(f"j{i}" for i in range(len(joints))))
        self.traversal()  # validates the tree

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    @property
    def root(self) -> int:
        return self.parents.index(-1)

    def weight_matrix(self, n_markers: int) -> np.ndarray:
        """``(J, M)`` matrix W with joint positions ``W @ markers``."""
        W = np.zeros((self.n_joints, n_markers))
        for j, pairs in enumerate(self.joints):
            for m, w in pairs:
                if m >= n_markers:
                    raise MapError(f"joint {j} references marker {m}, sequence has {n_markers}")
                W[j, m] += w
        return W

    def traversal(self) -> list:
        """Joints in root-to-leaf (breadth-first) order; raises if not a single rooted tree."""
        n = len(self.parents)
        roots = [j for j, p in enumerate(self.parents) if p == -1]
        if len(roots) != 1:
            raise MapError(f"kinematic tree needs exactly one root, found {len(roots)}")
        children = [[] for _ in range(n)]
        for j, p in enumerate(self.parents):
            if p == -1:
                continue
            if not 0 <= p < n or p == j:
                raise MapError(f"joint {j} has invalid parent {p}")
            children[p].append(j)
        order = [roots[0]]
        for j in order:
            order.extend(children[j])
        if len(order) != n:
            raise MapError("kinematic tree is disconnected or cyclic")
        return order

    def edges(self) -> list:
        """``(parent, child)`` pairs in traversal order."""
        return [(self.parents[j], j) for j in self.traversal() if self.parents[j] != -1]


def parse_skeleton_map(text: str) -> SkeletonMap:
    """Parse ``joint_index, parent_index, marker:weight, ...`` lines.

    Marker numbers in the file are 1-based; ``# comment`` tails name the joint.
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, _, comment = raw.partition("#")
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",") if f.strip()]
        try:
            joint, parent = int(fields[0]), int(fields[1])
            pairs = []
            for f in fields[2:]:
                m, w = f.split(":")
                pairs.append((int(m) - 1, float(w)))
        except (ValueError, IndexError):
            raise ParseError(f"skeleton map line {lineno}: cannot parse {raw!r}") from None
        if joint in entries:
            raise ParseError(f"skeleton map line {lineno}: joint {joint} defined twice")
        entries[joint] = (parent, tuple(pairs), comment.strip())
    if sorted(entries) != list(range(len(entries))):
        raise MapError("joint indices must be 0..J-1 without gaps")
    rows = [entries[j] for j in range(len(entries))]
    return SkeletonMap(
        joints=tuple(r[1] for r in rows),
        parents=tuple(r[0] for r in rows),
        names=tuple(r[2] or f"j{j}" for j, r in enumerate(rows)),
    )


def load_skeleton_map(path=None) -> SkeletonMap:
    """Read a map file; ``None`` loads the bundled 43-marker, 22-joint default."""
    if path is None:
        text = resources.files("dancegen.mocap").joinpath("data/default_skeleton.txt").read_text()
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_skeleton_map(text)


def format_skeleton_map(skel: SkeletonMap) -> str:
    lines = ["# joint_index, parent_index, (marker:weight)+  (markers 1-based)"]
    for j, (pairs, p) in enumerate(zip(skel.joints, skel.parents)):
        cells = ", ".join(f"{m + 1}:{w!r}" for m, w in pairs)
        lines.append(f"{j}, {p}, {cells}  # {skel.names[j]}")
    return "\n".join(lines) + "\n"
