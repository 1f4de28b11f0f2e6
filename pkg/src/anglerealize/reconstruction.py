"""Point recovery from angles, similarity alignment, and the distance baseline."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateAlignmentError, InfeasibleTriangleError,
                     ReconstructionError)
from .geometry import AngleVector, PointSet, _all_angles


@dataclass(frozen=True)
class SimilarityTransform:
    rotation_or_reflection: np.ndarray
    scale: float
    translation: np.ndarray

    def apply(self, points) -> np.ndarray:
        pts = points.points if isinstance(points, PointSet) else np.asarray(points)
        return self.scale * pts @ self.rotation_or_reflection + self.translation


def _rotate(v, angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def triangulate(p_i, p_j, alpha: float, beta: float, side: int = 1) -> np.ndarray:
    """Third triangle corner from the angles at ``p_i`` (alpha) and ``p_j`` (beta).

    ``side=+1`` places the point to the left of the ray p_i -> p_j.
    """
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    if not (0 < alpha < np.pi and 0 < beta < np.pi) or alpha + beta >= np.pi:
        raise InfeasibleTriangleError(f"no triangle with angles {alpha:.6g}, {beta:.6g}")
    base = p_j - p_i
    if not np.any(base):
        raise InfeasibleTriangleError("base points coincide")
    dist = np.linalg.norm(base) * np.sin(beta) / np.sin(np.pi - alpha - beta)
    return p_i + dist * _rotate(base / np.linalg.norm(base), side * alpha)


class _Recorder:
    def __init__(self, theta: AngleVector):
        self.theta = theta
        self.read = set()

    def __call__(self, i, j, k):
        m = self.theta.indexer.index(i, j, k)
        self.read.add(m)
        return float(self.theta.values[m])


def _build_up(theta: AngleVector, disambiguator: int = 2):
    n = theta.n_points
    get = _Recorder(theta)
    pts = np.zeros((n, 2))
    pts[1] = (1.0, 0.0)
    try:
        pts[2] = triangulate(pts[0], pts[1], get(0, 1, 2), get(1, 0, 2), side=1)
    except InfeasibleTriangleError as exc:
        raise ReconstructionError(2, str(exc)) from exc
    for p in range(3, n):
        try:
            alpha, beta = get(0, 1, p), get(1, 0, p)
            upper = triangulate(pts[0], pts[1], alpha, beta, side=1)
        except InfeasibleTriangleError as exc:
            raise ReconstructionError(p, str(exc)) from exc
        lower = upper * (1.0, -1.0)
        d = disambiguator if disambiguator < p else 2
        want = get(d, 0, p)
        err_up = abs(_angle(pts[d], pts[0], upper) - want)
        err_lo = abs(_angle(pts[d], pts[0], lower) - want)
        pts[p] = upper if err_up <= err_lo else lower
    return PointSet(pts), get.read


def _angle(p_i, p_j, p_k):
    u, v = p_j - p_i, p_k - p_i
    return np.arccos(np.clip(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)), -1.0, 1.0))


def build_up(theta: AngleVector, disambiguator: int = 2) -> PointSet:
    """Place p0 = (0, 0), p1 = (1, 0), then every other point by triangulation.

    Points from index 3 on have a mirror candidate across the base line; the
    one matching the angle at ``disambiguator`` (default node 2) wins.
    """
    return _build_up(theta, disambiguator)[0]


def build_up_consumed_count(n_points: int) -> int:
    """Number of distinct angles ``build_up`` reads, found by instrumenting it."""
    from .geometry import PointSet, extract_angles
    t = np.linspace(0.3, 2.5, n_points)
    # points on a circle arc are in general position
    pts = PointSet(np.c_[np.cos(t), np.sin(t)] * np.linspace(1.0, 1.4, n_points)[:, None])
    return len(_build_up(extract_angles(pts))[1])


def procrustes_align(x, y, allow_scale: bool = True):
    """Fit ``s * x @ Q + t`` to ``y``; reflections allowed.

    Returns ``(SimilarityTransform, mse)`` with mse the mean over points of the
    squared residual distance.
    """
    x = x.points if isinstance(x, PointSet) else np.asarray(x, dtype=float)
    y = y.points if isinstance(y, PointSet) else np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    mx, my = x.mean(axis=0), y.mean(axis=0)
    xc, yc = x - mx, y - my
    norm_x = np.sum(xc ** 2)
    if norm_x <= 1e-300:
        raise DegenerateAlignmentError("estimate has zero spread")
    u, s, vt = np.linalg.svd(xc.T @ yc)
    q = u @ vt
    scale = s.sum() / norm_x if allow_scale else 1.0
    if scale <= 0:
        raise DegenerateAlignmentError("non-positive optimal scale")
    t = my - scale * mx @ q
    tf = SimilarityTransform(q, float(scale), t)
    mse = float(np.mean(np.sum((tf.apply(x) - y) ** 2, axis=1)))
    return tf, mse


def discrepancy(theta: AngleVector, points: PointSet) -> float:
    """Mean absolute gap between ``theta`` and the angles of ``points``."""
    if points.n != theta.n_points:
        raise ValueError("angle vector and point set sizes differ")
    return float(np.mean(np.abs(theta.values - _all_angles(points.points))))


def distance_matrix(points) -> np.ndarray:
    pts = points.points if isinstance(points, PointSet) else np.asarray(points)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sum(diff ** 2, axis=-1)


def classic_mds(sq_dist, dim: int = 2) -> np.ndarray:
    """Embed squared distances via the top eigenpairs of -J D J / 2."""
    d = np.asarray(sq_dist, dtype=float)
    n = len(d)
    if d.shape != (n, n) or not np.allclose(d, d.T) or np.any(np.diag(d) != 0):
        raise ValueError("squared-distance matrix must be square, symmetric, zero-diagonal")
    j = np.eye(n) - np.ones((n, n)) / n
    gram = -0.5 * j @ d @ j
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1][:dim]
    evals, evecs = evals[order], evecs[:, order]
    scale = np.max(np.abs(evals)) if evals.size else 0.0
    positive = evals > 1e-12 * max(scale, 1e-300)
    if positive.sum() < dim:
        warnings.warn(f"Gram matrix has {positive.sum()} positive eigenvalues < d={dim}",
                      RuntimeWarning, stacklevel=2)
    return evecs * np.sqrt(np.where(positive, evals, 0.0))
