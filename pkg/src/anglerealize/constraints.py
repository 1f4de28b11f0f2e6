"""Analytic realizability constraints.

Linear part: angles at one node that tile a larger angle (or the full turn),
and triangle sums through node 0. Nonlinear part: the sine-law product over
every four-point subset.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import SingularConstraintError
from .geometry import (AngleVector, EquivalencyClass, PointSet, TripletIndexer,
                       bearing_cycles, dof, equivalency_class, quad_count, triplet_count)

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ConstraintRow:
    coeffs: dict
    b: float
    tag: tuple


@dataclass(frozen=True)
class LinearConstraintSystem:
    a_matrix: np.ndarray
    b_vector: np.ndarray
    row_tags: tuple
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def n_rows(self) -> int:
        return len(self.b_vector)

    @property
    def n_angles(self) -> int:
        return self.a_matrix.shape[1]

    def residual(self, theta) -> np.ndarray:
        values = theta.values if isinstance(theta, AngleVector) else np.asarray(theta)
        return self.a_matrix @ values - self.b_vector

    def prefix(self, count: int) -> "LinearConstraintSystem":
        return LinearConstraintSystem(self.a_matrix[:count], self.b_vector[:count],
                                      self.row_tags[:count], dict(self.metadata))

    @classmethod
    def empty(cls, n_angles: int) -> "LinearConstraintSystem":
        return cls(np.zeros((0, n_angles)), np.zeros(0), ())


def _run_rows(node, cycle, gaps, indexer):
    n = len(cycle)
    reflex = [t for t, g in enumerate(gaps) if g > np.pi]
    gap_idx = [indexer.index(node, cycle[t], cycle[(t + 1) % n]) for t in range(n)]
    rows = []
    for start in range(n):
        for length in range(2, n):
            span = [(start + s) % n for s in range(length)]
            if any(t in reflex for t in span):
                continue
            end = (start + length) % n
            enclosing = indexer.index(node, cycle[start], cycle[end])
            coeffs = {gap_idx[t]: 1.0 for t in span}
            total = sum(gaps[t] for t in span)
            # inner angle is the run itself or its complement to the full turn
            if total < np.pi:
                coeffs[enclosing] = -1.0
                b = 0.0
            else:
                coeffs[enclosing] = 1.0
                b = 2 * np.pi
            rows.append(ConstraintRow(coeffs, b, ("single", node, (cycle[start], cycle[end]))))
    if not reflex and n >= 3:
        rows.append(ConstraintRow({g: 1.0 for g in gap_idx}, 2 * np.pi, ("single", node, "turn")))
    return rows


def build_single_constraints(eq_class: EquivalencyClass, representative: PointSet) -> list[ConstraintRow]:
    """Adjacent-angle sums at every node for the class of ``representative``.

    Which runs of adjacent gaps add up to the enclosing inner angle, and which
    to its complement to 2*pi, is read off the representative embedding.
    """
    n = eq_class.n_points
    if representative.n != n:
        raise IndexError(f"class has {n} nodes, representative has {representative.n}")
    if equivalency_class(representative) != eq_class:
        raise ValueError("representative does not belong to the given equivalency class")
    if n < 4:
        return []
    indexer = TripletIndexer(n)
    pts = representative.points
    rows = []
    for node, cycle in enumerate(bearing_cycles(representative)):
        d = pts[cycle] - pts[node]
        bearing = np.mod(-np.arctan2(d[:, 1], d[:, 0]), 2 * np.pi)
        gaps = np.mod(np.roll(bearing, -1) - bearing, 2 * np.pi)
        rows.extend(_run_rows(node, cycle, gaps, indexer))
    return rows


def build_triangle_constraints(n_points: int) -> list[ConstraintRow]:
    indexer = TripletIndexer(n_points)
    rows = []
    for j, k in itertools.combinations(range(1, n_points), 2):
        coeffs = {indexer.index(0, j, k): 1.0, indexer.index(j, 0, k): 1.0, indexer.index(k, 0, j): 1.0}
        rows.append(ConstraintRow(coeffs, np.pi, ("triangle", (0, j, k))))
    return rows


def rows_to_matrix(rows, n_angles):
    a = np.zeros((len(rows), n_angles))
    for r, row in enumerate(rows):
        for m, v in row.coeffs.items():
            a[r, m] = v
    return a, np.array([row.b for row in rows], dtype=float)


def numerical_rank(matrix, rtol=RANK_RTOL) -> int:
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def assemble_linear_system(single_rows, triangle_rows, n_angles: int, target_rank=None,
                           rtol: float = RANK_RTOL) -> LinearConstraintSystem:
    """Stack rows and keep a linearly independent subset.

    Rows are chosen by column-pivoted QR of A^T and kept in their original
    order. With ``target_rank`` set, at most that many rows are retained.
    """
    rows = list(single_rows) + list(triangle_rows)
    a, b = rows_to_matrix(rows, n_angles)
    achieved = numerical_rank(a, rtol)
    meta = {"achieved_rank": achieved, "target_rank": target_rank,
            "n_candidates": len(rows), "warnings": []}
    if achieved == 0:
        return LinearConstraintSystem(np.zeros((0, n_angles)), np.zeros(0), (), meta)
    _, _, piv = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    keep = sorted(piv[:achieved])
    if numerical_rank(a[keep], rtol) != achieved:
        raise RuntimeError("pivoted QR failed to isolate independent rows")
    if target_rank is not None:
        if achieved < target_rank:
            msg = f"rank deficit: achieved {achieved} < target {target_rank}"
            meta["warnings"].append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        keep = keep[:target_rank]
    return LinearConstraintSystem(a[keep], b[keep], tuple(rows[k].tag for k in keep), meta)


def expected_linear_rank(n_points: int) -> int:
    """Rank the linear system actually attains: M - C(N, 2) + 1."""
    return triplet_count(n_points) - n_points * (n_points - 1) // 2 + 1


def nominal_linear_rank(n_points: int) -> int:
    """M - DOF - K, the count obtained when every quad is independent."""
    return triplet_count(n_points) - dof(n_points) - quad_count(n_points)


def analytic_linear_system(representative: PointSet, target_rank=None) -> LinearConstraintSystem:
    cls = equivalency_class(representative)
    n = representative.n
    return assemble_linear_system(build_single_constraints(cls, representative),
                                  build_triangle_constraints(n), triplet_count(n), target_rank)


@dataclass(frozen=True)
class QuadrilateralConstraintSet:
    n_points: int
    quads: tuple

    def __post_init__(self):
        quads = tuple(tuple(int(x) for x in q) for q in self.quads)
        object.__setattr__(self, "quads", quads)
        ix = TripletIndexer(self.n_points) if self.n_points >= 3 else None
        num = np.zeros((len(quads), 3), dtype=int)
        den = np.zeros((len(quads), 3), dtype=int)
        for r, (a, b, c, d) in enumerate(quads):
            num[r] = [ix(b, a, c), ix(c, a, d), ix(d, a, b)]
            den[r] = [ix(b, a, d), ix(c, a, b), ix(d, a, c)]
        object.__setattr__(self, "num_index", num)
        object.__setattr__(self, "den_index", den)

    def __len__(self):
        return len(self.quads)

    def prefix(self, count: int) -> "QuadrilateralConstraintSet":
        return QuadrilateralConstraintSet(self.n_points, self.quads[:count])

    def residuals(self, theta) -> np.ndarray:
        values = _values(theta)
        if not self.quads:
            return np.zeros(0)
        s_num, s_den = _sines(values, self.num_index, self.den_index)
        return np.prod(s_num, axis=1) / np.prod(s_den, axis=1) - 1.0

    def jacobian(self, theta) -> np.ndarray:
        """Dense K x M Jacobian of the residuals."""
        values = _values(theta)
        jac = np.zeros((len(self.quads), len(values)))
        if not self.quads:
            return jac
        s_num, s_den = _sines(values, self.num_index, self.den_index)
        g = np.prod(s_num, axis=1) / np.prod(s_den, axis=1)
        rows = np.arange(len(self.quads))[:, None]
        # d/dθ log sin θ = cot θ
        np.add.at(jac, (np.broadcast_to(rows, self.num_index.shape), self.num_index),
                  g[:, None] / np.tan(values[self.num_index]))
        np.add.at(jac, (np.broadcast_to(rows, self.den_index.shape), self.den_index),
                  -g[:, None] / np.tan(values[self.den_index]))
        return jac


    def log_residuals(self, theta) -> np.ndarray:
        """log(f_k + 1); vanishes exactly where the residuals do."""
        values = _values(theta)
        if not self.quads:
            return np.zeros(0)
        s_num, s_den = _sines(values, self.num_index, self.den_index)
        return np.sum(np.log(s_num), axis=1) - np.sum(np.log(s_den), axis=1)

    def log_jacobian(self, theta) -> np.ndarray:
        values = _values(theta)
        jac = np.zeros((len(self.quads), len(values)))
        if not self.quads:
            return jac
        _sines(values, self.num_index, self.den_index)
        rows = np.broadcast_to(np.arange(len(self.quads))[:, None], self.num_index.shape)
        np.add.at(jac, (rows, self.num_index), 1.0 / np.tan(values[self.num_index]))
        np.add.at(jac, (rows, self.den_index), -1.0 / np.tan(values[self.den_index]))
        return jac


def _values(theta):
    return theta.values if isinstance(theta, AngleVector) else np.asarray(theta, dtype=float)


def _sines(values, num, den):
    involved = np.concatenate([values[num].ravel(), values[den].ravel()])
    if np.any(involved <= 0.0) or np.any(involved >= np.pi):
        raise SingularConstraintError("quad constraint involves an angle at 0 or pi")
    return np.sin(values[num]), np.sin(values[den])


def enumerate_quads(n_points: int) -> QuadrilateralConstraintSet:
    if n_points < 4:
        return QuadrilateralConstraintSet(n_points, ())
    return QuadrilateralConstraintSet(n_points, tuple(itertools.combinations(range(n_points), 4)))


def quad_residual(theta: AngleVector, quad) -> float:
    return float(QuadrilateralConstraintSet(theta.n_points, (quad,)).residuals(theta)[0])


def quad_jacobian(theta: AngleVector, quad) -> tuple[np.ndarray, np.ndarray]:
    """Sparse gradient of one quad residual as ``(indices, values)``, 6 entries."""
    qs = QuadrilateralConstraintSet(theta.n_points, (quad,))
    idx = np.concatenate([qs.num_index[0], qs.den_index[0]])
    return idx, qs.jacobian(theta)[0, idx]


def _tag_to_json(tag):
    kind = tag[0]
    if kind == "single":
        span = tag[2] if tag[2] == "turn" else list(tag[2])
        return {"kind": "single", "node": tag[1], "span": span}
    if kind == "triangle":
        return {"kind": "triangle", "triplet": list(tag[1])}
    return {"kind": "learned", "index": tag[1]}


def _tag_from_json(obj):
    kind = obj["kind"]
    if kind == "single":
        span = obj["span"] if obj["span"] == "turn" else tuple(obj["span"])
        return ("single", obj["node"], span)
    if kind == "triangle":
        return ("triangle", tuple(obj["triplet"]))
    return ("learned", obj["index"])


def system_to_json(system: LinearConstraintSystem) -> dict:
    rows = []
    for r in range(system.n_rows):
        nz = np.flatnonzero(system.a_matrix[r])
        rows.append({"tag": _tag_to_json(system.row_tags[r]),
                     "coeffs": [[int(m), float(system.a_matrix[r, m])] for m in nz],
                     "b": float(system.b_vector[r])})
    return {"L": system.n_rows, "M": system.n_angles, "rows": rows}


def system_from_json(obj: dict, n_angles=None) -> LinearConstraintSystem:
    n_angles = n_angles if n_angles is not None else obj["M"]
    a = np.zeros((len(obj["rows"]), n_angles))
    for r, row in enumerate(obj["rows"]):
        for m, v in row["coeffs"]:
            a[r, int(m)] = v
    if len(obj["rows"]) != obj["L"]:
        raise ValueError(f"L={obj['L']} but {len(obj['rows'])} rows given")
    b = np.array([row["b"] for row in obj["rows"]], dtype=float)
    return LinearConstraintSystem(a, b, tuple(_tag_from_json(row["tag"]) for row in obj["rows"]))
