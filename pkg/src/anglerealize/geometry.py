"""Planar point sets, canonical angle indexing and counting formulas.

Node indices are 0-based everywhere in code. The angle at vertex ``i``
between rays toward ``j`` and ``k`` lives at position ``m(i, j, k)`` of an
angle vector, with vertices ascending and ``(j, k)`` lexicographic, ``j < k``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .errors import DegenerateGeometryError, InvalidSizeError, SamplingError

MIN_ANGLE = 1e-3
MAX_RESAMPLES = 10_000


def triplet_count(n_points: int) -> int:
    if n_points < 3:
        raise InvalidSizeError(f"need at least 3 points, got {n_points}")
    return n_points * (n_points - 1) * (n_points - 2) // 2


def dof(n_points: int, dim: int = 2) -> int:
    """Degrees of freedom of a point set modulo similarity transforms."""
    if n_points < 3 or dim < 2:
        raise InvalidSizeError(f"need N >= 3 and d >= 2, got N={n_points}, d={dim}")
    return n_points * dim - dim * (dim + 1) // 2 - 1


def quad_count(n_points: int) -> int:
    return comb(n_points, 4)


def triangle_constraint_count(n_points: int) -> int:
    return comb(n_points - 1, 2)


class TripletIndexer:
    """Bijection between angle triplets ``(i, j, k)`` and vector positions."""

    def __init__(self, n_points: int):
        self.n_points = n_points
        self.size = triplet_count(n_points)
        self.triplets = _triplets(n_points)
        self._index = {t: m for m, t in enumerate(self.triplets)}

    def __len__(self):
        return self.size

    def __eq__(self, other):
        return isinstance(other, TripletIndexer) and other.n_points == self.n_points

    def __hash__(self):
        return hash(("TripletIndexer", self.n_points))

    def __repr__(self):
        return f"TripletIndexer(n_points={self.n_points})"

    def index(self, i: int, j: int, k: int) -> int:
        """Position of the angle at ``i`` between ``j`` and ``k`` (order-free)."""
        if j > k:
            j, k = k, j
        try:
            return self._index[(i, j, k)]
        except KeyError:
            raise IndexError(f"no angle triplet ({i}, {j}, {k}) for N={self.n_points}") from None

    __call__ = index

    def triplet(self, m: int) -> tuple[int, int, int]:
        return self.triplets[m]


@lru_cache(maxsize=None)
def _triplets(n_points):
    out = []
    for i in range(n_points):
        others = [x for x in range(n_points) if x != i]
        out.extend((i, j, k) for j, k in itertools.combinations(others, 2))
    return tuple(out)


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    dim: int = 2

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise InvalidSizeError(f"expected an (N, {self.dim}) array, got shape {pts.shape}")
        if len(pts) < 3:
            raise InvalidSizeError(f"need at least 3 points, got {len(pts)}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self):
        return self.n

    def transformed(self, matrix, scale=1.0, shift=(0.0, 0.0)) -> "PointSet":
        return PointSet(scale * self.points @ np.asarray(matrix).T + np.asarray(shift))


@dataclass(frozen=True)
class AngleVector:
    indexer: TripletIndexer
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.indexer.size,):
            raise InvalidSizeError(
                f"expected {self.indexer.size} angles for N={self.indexer.n_points}, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values) -> "AngleVector":
        values = np.asarray(values, dtype=float)
        return cls(TripletIndexer(n_from_triplet_count(len(values))), values)

    @property
    def n_points(self) -> int:
        return self.indexer.n_points

    def __len__(self):
        return self.indexer.size

    def angle(self, i, j, k) -> float:
        return float(self.values[self.indexer.index(i, j, k)])


def n_from_triplet_count(m: int) -> int:
    n = 3
    while triplet_count(n) < m:
        n += 1
    if triplet_count(n) != m:
        raise InvalidSizeError(f"{m} is not N(N-1)(N-2)/2 for any N")
    return n


def inner_angle(p_i, p_j, p_k) -> float:
    u = np.asarray(p_j, dtype=float) - np.asarray(p_i, dtype=float)
    v = np.asarray(p_k, dtype=float) - np.asarray(p_i, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateGeometryError("inner angle with a coincident point")
    return float(np.arccos(np.clip(u @ v / (nu * nv), -1.0, 1.0)))


def _all_angles(points):
    n = len(points)
    idx = np.array(_triplets(n))
    u = points[idx[:, 1]] - points[idx[:, 0]]
    v = points[idx[:, 2]] - points[idx[:, 0]]
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    if np.any(nu == 0.0) or np.any(nv == 0.0):
        raise DegenerateGeometryError("point set has coincident points")
    cos = np.einsum("ij,ij->i", u, v) / (nu * nv)
    return np.arccos(np.clip(cos, -1.0, 1.0))


def is_degenerate(points: PointSet, min_angle: float = MIN_ANGLE) -> bool:
    try:
        vals = _all_angles(points.points)
    except DegenerateGeometryError:
        return True
    return bool(np.any(vals < min_angle) or np.any(vals > np.pi - min_angle))


def extract_angles(points: PointSet, min_angle: float = MIN_ANGLE) -> AngleVector:
    vals = _all_angles(points.points)
    lo, hi = vals.min(), vals.max()
    if lo < min_angle or hi > np.pi - min_angle:
        raise DegenerateGeometryError(
            f"angle outside [{min_angle}, pi - {min_angle}]: min {lo:.3g}, max {hi:.3g}")
    return AngleVector(TripletIndexer(points.n), vals)


def _canonical_cycle(seq):
    k = seq.index(min(seq))
    return tuple(seq[k:] + seq[:k])


@dataclass(frozen=True)
class EquivalencyClass:
    """Per-node circular order of the other nodes, canonicalized.

    Each cycle is rotated to start at its smallest label. A class and its
    mirror image (every cycle reversed) compare equal; the stored form is the
    lexicographically smaller of the two.
    """
    cycles: tuple = field()

    def __post_init__(self):
        cycles = tuple(tuple(int(x) for x in c) for c in self.cycles)
        n = len(cycles)
        for i, c in enumerate(cycles):
            if sorted(c) != [x for x in range(n) if x != i]:
                raise IndexError(f"cycle of node {i} is not a permutation of the other nodes")
        fwd = tuple(_canonical_cycle(list(c)) for c in cycles)
        rev = tuple(_canonical_cycle(list(c[::-1])) for c in cycles)
        object.__setattr__(self, "cycles", min(fwd, rev))

    @property
    def n_points(self) -> int:
        return len(self.cycles)


def bearing_cycles(points: PointSet, tol: float = 1e-12) -> list[list[int]]:
    """Other nodes sorted by clockwise bearing, starting from the +x axis."""
    pts = points.points
    out = []
    for i in range(points.n):
        others = [j for j in range(points.n) if j != i]
        d = pts[others] - pts[i]
        bearing = np.mod(-np.arctan2(d[:, 1], d[:, 0]), 2 * np.pi)
        order = np.argsort(bearing, kind="stable")
        sb = bearing[order]
        gaps = np.diff(np.r_[sb, sb[0] + 2 * np.pi])
        if np.any(gaps <= tol):
            raise DegenerateGeometryError(f"collinear edges at node {i}")
        out.append([others[t] for t in order])
    return out


def equivalency_class(points: PointSet) -> EquivalencyClass:
    return EquivalencyClass(tuple(tuple(c) for c in bearing_cycles(points)))


def random_point_set(n_points: int, side_length: float = 1.0, rng_seed=None,
                     min_angle: float = MIN_ANGLE) -> PointSet:
    """Uniform points in a square, resampling whole sets that are degenerate."""
    if n_points < 3:
        raise InvalidSizeError(f"need at least 3 points, got {n_points}")
    if side_length <= 0:
        raise ValueError("side_length must be positive")
    rng = np.random.default_rng(rng_seed)
    for _ in range(MAX_RESAMPLES):
        cand = PointSet(rng.uniform(0.0, side_length, size=(n_points, 2)))
        if not is_degenerate(cand, min_angle):
            return cand
    raise SamplingError(f"no non-degenerate set of {n_points} points after {MAX_RESAMPLES} draws")


def min_measurement_count(n_points: int, dim: int = 2) -> dict:
    """Angles needed by the build-up routine, next to the closed-form count.

    ``consumed`` is what ``reconstruction.build_up`` actually reads (only
    defined for d = 2); ``formula`` is N(d+1) - d(d+1)/2 + d.
    """
    if n_points < dim + 1:
        raise InvalidSizeError(f"need N >= d + 1, got N={n_points}, d={dim}")
    formula = n_points * (dim + 1) - dim * (dim + 1) // 2 + dim
    consumed = None
    if dim == 2:
        from .reconstruction import build_up_consumed_count
        consumed = build_up_consumed_count(n_points)
    return {"consumed": consumed, "formula": formula, "dof": dof(n_points, dim) if n_points >= 3 else None}
