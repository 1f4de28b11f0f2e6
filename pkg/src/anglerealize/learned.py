"""Linear constraints learned from sampled angle vectors of one class."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .constraints import LinearConstraintSystem, nominal_linear_rank
from .errors import SamplingError
from .geometry import (MIN_ANGLE, EquivalencyClass, PointSet, _all_angles,
                       equivalency_class, is_degenerate, triplet_count)
from .errors import DegenerateGeometryError

NULL_RTOL = 1e-8
MIN_GAP = 1e3


@dataclass(frozen=True)
class SampleMatrix:
    rows: np.ndarray
    eq_class: EquivalencyClass

    @property
    def n_samples(self) -> int:
        return len(self.rows)

    @property
    def angles(self) -> np.ndarray:
        return self.rows[:, :-1]


def sample_class_angles(eq_class: EquivalencyClass, representative: PointSet, n_samples: int,
                        rng_seed=None, rel_sigma: float = 0.05, min_angle: float = MIN_ANGLE,
                        max_attempts=None) -> SampleMatrix:
    """Perturb ``representative`` with Gaussian noise, keeping same-class draws.

    The noise scale is ``rel_sigma`` times the larger side of the bounding box.
    """
    if equivalency_class(representative) != eq_class:
        raise ValueError("representative does not belong to the given equivalency class")
    m = triplet_count(representative.n)
    if n_samples <= 0:
        return SampleMatrix(np.zeros((0, m + 1)), eq_class)
    rng = np.random.default_rng(rng_seed)
    base = representative.points
    sigma = rel_sigma * float(np.ptp(base, axis=0).max())
    budget = max_attempts if max_attempts is not None else 50 * n_samples + 1000
    rows = []
    for _ in range(budget):
        cand = PointSet(base + rng.normal(0.0, sigma, size=base.shape))
        if is_degenerate(cand, min_angle):
            continue
        try:
            if equivalency_class(cand) != eq_class:
                continue
        except DegenerateGeometryError:
            continue
        rows.append(np.r_[_all_angles(cand.points), -1.0])
        if len(rows) == n_samples:
            return SampleMatrix(np.array(rows), eq_class)
    raise SamplingError(f"only {len(rows)} of {n_samples} same-class samples in {budget} draws; "
                        "representative may be too close to a class boundary")


def null_space_dimension(samples: SampleMatrix, rtol: float = NULL_RTOL) -> int:
    """Number of singular values of the sample matrix below ``rtol * s_max``."""
    n_cols = samples.rows.shape[1]
    if samples.n_samples == 0:
        return n_cols
    s = np.linalg.svd(samples.rows, compute_uv=False)
    return n_cols - int(np.sum(s > rtol * s[0]))


def learn_constraints(samples: SampleMatrix, n_constraints=None,
                      rtol: float = NULL_RTOL) -> LinearConstraintSystem:
    """Right singular vectors of the sample matrix with the smallest singular values.

    Each vector ``v`` satisfies ``theta @ v[:-1] - v[-1] = 0`` on every sample,
    so ``A = v[:-1]`` and ``b = v[-1]``. Without ``n_constraints`` the count is
    the numerical null-space dimension. Rows are ordered from smallest singular
    value up. ``metadata["gap"]`` is the ratio of the first excluded singular
    value to the largest included one.
    """
    n_cols = samples.rows.shape[1]
    if n_constraints is None:
        n_constraints = null_space_dimension(samples, rtol)
    if samples.n_samples < n_constraints:
        raise ValueError(f"need at least {n_constraints} samples, got {samples.n_samples}")
    _, s, vt = np.linalg.svd(samples.rows, full_matrices=True)
    sing = np.zeros(n_cols)
    sing[:len(s)] = s
    # ascending singular value order
    order = np.arange(n_cols)[::-1]
    chosen = order[:n_constraints]
    c = vt[chosen]
    meta = {"singular_values": sing.tolist(), "n_constraints": int(n_constraints),
            "null_dimension": null_space_dimension(samples, rtol), "warnings": []}
    if n_constraints < n_cols:
        inside = sing[chosen[-1]] if n_constraints else 0.0
        outside = sing[order[n_constraints]]
        gap = outside / inside if inside > 0 else np.inf
    else:
        gap = np.inf
    meta["gap"] = float(gap)
    if gap < MIN_GAP:
        msg = f"ill-separated null space: singular-value gap {gap:.3g} < {MIN_GAP:g}"
        meta["warnings"].append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    tags = tuple(("learned", r) for r in range(n_constraints))
    return LinearConstraintSystem(c[:, :-1].copy(), c[:, -1].copy(), tags, meta)


def learned_linear_system(representative: PointSet, n_samples=None, rng_seed=None,
                          n_constraints=None) -> LinearConstraintSystem:
    """Sample the class of ``representative`` and learn its constraints.

    ``n_samples`` defaults to twice the nominal constraint count M - DOF - K
    (at least M + 1 so the null space is not inflated by too few rows).
    """
    n = representative.n
    if n_samples is None:
        n_samples = max(2 * max(nominal_linear_rank(n), 1), triplet_count(n) + 1)
    cls = equivalency_class(representative)
    samples = sample_class_angles(cls, representative, n_samples, rng_seed)
    return learn_constraints(samples, n_constraints)
