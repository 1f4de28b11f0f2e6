"""Seeded Monte-Carlo studies: discrepancy vs. constraint count, and angle-
vs distance-based point recovery."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .constraints import analytic_linear_system, enumerate_quads
from .denoise import DenoiseProblem, SolverOptions, denoise_with_constraint_prefix
from .errors import ReconstructionError, DegenerateAlignmentError
from .geometry import MIN_ANGLE, AngleVector, PointSet, extract_angles, random_point_set
from .learned import learned_linear_system
from .reconstruction import build_up, classic_mds, discrepancy, distance_matrix, procrustes_align

CSV_HEADER = ["experiment", "N", "side", "sigma_a", "sigma_d", "trial", "seed", "n_constraints",
              "mode", "discrepancy_mae", "accuracy_mse", "converged", "iterations", "runtime_s"]

MODES = ("analytic", "learned")


@dataclass
class ExperimentConfig:
    n_points: list = field(default_factory=lambda: [5])
    side_length: list = field(default_factory=lambda: [1.0])
    sigma_a: list = field(default_factory=lambda: [1e-3])
    sigma_d: list = field(default_factory=lambda: [1e-2])
    n_trials: int = 20
    seed: int = 0
    constraint_mode: object = "analytic"
    learner_T: int | None = None
    solver_options: dict = field(default_factory=dict)
    min_angle: float = MIN_ANGLE
    grid_size: int = 12
    distance_noise_on: str = "distances"
    record_runtime: bool = False

    def __post_init__(self):
        for name in ("n_points", "side_length", "sigma_a", "sigma_d"):
            value = getattr(self, name)
            if not isinstance(value, (list, tuple)):
                value = [value]
            if not value:
                raise ValueError(f"{name} must be non-empty")
            setattr(self, name, list(value))
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if any(s < 0 for s in self.sigma_a + self.sigma_d):
            raise ValueError("noise levels must be non-negative")
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown constraint mode {mode!r}")
        if self.distance_noise_on not in ("distances", "squared"):
            raise ValueError("distance_noise_on must be 'distances' or 'squared'")
        SolverOptions(**self.solver_options)

    @property
    def modes(self) -> list:
        mode = self.constraint_mode
        if mode == "both":
            return list(MODES)
        return [mode] if isinstance(mode, str) else list(mode)

    @property
    def solver(self) -> SolverOptions:
        return SolverOptions(**self.solver_options)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass
class TrialRecord:
    experiment: str
    N: int
    side: float
    sigma_a: float
    sigma_d: float
    trial: int
    seed: int
    n_constraints: int
    mode: str
    discrepancy_mae: float
    accuracy_mse: float
    converged: bool
    iterations: int
    runtime_s: float | None = None

    def as_row(self) -> list:
        out = []
        for name in CSV_HEADER:
            value = getattr(self, name)
            if value is None:
                out.append("")
            elif isinstance(value, bool):
                out.append("1" if value else "0")
            elif isinstance(value, float):
                out.append(repr(value))
            else:
                out.append(str(value))
        return out


def trial_seed(seed: int, *key: int) -> int:
    """Independent per-trial seed derived from the master seed and a key."""
    return int(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)).generate_state(1)[0])


def add_angle_noise(theta: AngleVector, sigma_a: float, rng_seed=None, margin: float = 1e-6) -> AngleVector:
    if sigma_a < 0:
        raise ValueError("sigma_a must be non-negative")
    if sigma_a == 0:
        return theta
    rng = np.random.default_rng(rng_seed)
    noisy = theta.values + rng.normal(0.0, sigma_a, size=len(theta))
    return AngleVector(theta.indexer, np.clip(noisy, margin, np.pi - margin))


def add_distance_noise(points: PointSet, sigma_d: float, rng_seed=None, on: str = "distances") -> np.ndarray:
    """Squared-distance matrix with symmetric Gaussian noise, truncated at 0."""
    rng = np.random.default_rng(rng_seed)
    sq = distance_matrix(points)
    n = len(sq)
    iu = np.triu_indices(n, 1)
    noise = np.zeros((n, n))
    noise[iu] = rng.normal(0.0, sigma_d, size=len(iu[0]))
    noise = noise + noise.T
    if on == "distances":
        return np.maximum(np.sqrt(sq) + noise, 0.0) ** 2
    return np.maximum(sq + noise, 0.0)


def constraint_grid(total: int, n_linear: int, size: int = 12) -> list[int]:
    """``size`` evenly spaced counts in [0, total] plus 0, n_linear and total."""
    grid = {int(round(v)) for v in np.linspace(0, total, size)} if size > 0 else set()
    return sorted(grid | {0, n_linear, total})


def _recover(theta_hat, truth):
    try:
        rebuilt = build_up(theta_hat)
        return discrepancy(theta_hat, rebuilt), procrustes_align(rebuilt, truth, allow_scale=True)[1]
    except (ReconstructionError, DegenerateAlignmentError):
        return math.nan, math.nan


def _linear_system(mode, points, seed, learner_t):
    if mode == "analytic":
        return analytic_linear_system(points)
    return learned_linear_system(points, n_samples=learner_t, rng_seed=seed)


def _discrepancy_trial(config: ExperimentConfig, n: int, side: float, trial: int) -> list[TrialRecord]:
    seed = trial_seed(config.seed, n, trial)
    points = random_point_set(n, side, np.random.default_rng(seed), config.min_angle)
    theta = extract_angles(points, config.min_angle)
    quads = enumerate_quads(n)
    records = []
    for a_idx, sigma_a in enumerate(config.sigma_a):
        noisy = add_angle_noise(theta, sigma_a, trial_seed(seed, 1, a_idx), config.solver.bound_margin)
        for m_idx, mode in enumerate(config.modes):
            linear = _linear_system(mode, points, trial_seed(seed, 2, m_idx), config.learner_T)
            problem = DenoiseProblem(noisy, linear, quads, config.solver)
            for count in constraint_grid(problem.n_constraints, linear.n_rows, config.grid_size):
                start = time.perf_counter()
                result = denoise_with_constraint_prefix(problem, count)
                disc, acc = _recover(result.denoised_angles, points)
                elapsed = time.perf_counter() - start
                records.append(TrialRecord(
                    "discrepancy", n, float(side), float(sigma_a), 0.0, trial, seed, count, mode,
                    disc, acc, result.converged, result.iterations,
                    elapsed if config.record_runtime else None))
    return records


def _angle_distance_trial(config: ExperimentConfig, n: int, side: float, trial: int) -> list[TrialRecord]:
    seed = trial_seed(config.seed, n, trial, int(round(side * 1e6)))
    points = random_point_set(n, side, np.random.default_rng(seed), config.min_angle)
    theta = extract_angles(points, config.min_angle)
    quads = enumerate_quads(n)
    linear = analytic_linear_system(points)
    records = []
    for a_idx, sigma_a in enumerate(config.sigma_a):
        start = time.perf_counter()
        noisy = add_angle_noise(theta, sigma_a, trial_seed(seed, 1, a_idx), config.solver.bound_margin)
        problem = DenoiseProblem(noisy, linear, quads, config.solver)
        result = denoise_with_constraint_prefix(problem, problem.n_constraints)
        disc, acc = _recover(result.denoised_angles, points)
        elapsed = time.perf_counter() - start
        records.append(TrialRecord(
            "angle-vs-distance", n, float(side), float(sigma_a), 0.0, trial, seed,
            problem.n_constraints, "angle", disc, acc,
            result.converged, result.iterations, elapsed if config.record_runtime else None))
    for d_idx, sigma_d in enumerate(config.sigma_d):
        start = time.perf_counter()
        sq = add_distance_noise(points, sigma_d, trial_seed(seed, 3, d_idx), config.distance_noise_on)
        est = classic_mds(sq, 2)
        try:
            acc = procrustes_align(est, points, allow_scale=True)[1]
        except DegenerateAlignmentError:
            acc = math.nan
        elapsed = time.perf_counter() - start
        records.append(TrialRecord(
            "angle-vs-distance", n, float(side), 0.0, float(sigma_d), trial, seed, 0, "distance",
            math.nan, acc, True, 0, elapsed if config.record_runtime else None))
    return records


def _run(task, config, jobs, workers):
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(task, *zip(*[(config, *job) for job in jobs])))
    else:
        chunks = [task(config, *job) for job in jobs]
    return [rec for chunk in chunks for rec in chunk]


def run_discrepancy_experiment(config: ExperimentConfig, workers: int = 0) -> list[TrialRecord]:
    """Constraint-count sweep per N, side, noise level and mode.

    Rows come back in a fixed order (N, side, trial, sigma_a, mode, count)
    regardless of ``workers``.
    """
    jobs = [(n, side, t) for n in config.n_points for side in config.side_length
            for t in range(config.n_trials)]
    return _run(_discrepancy_trial, config, jobs, workers)


def run_angle_vs_distance(config: ExperimentConfig, workers: int = 0) -> list[TrialRecord]:
    jobs = [(n, side, t) for n in config.n_points for side in config.side_length
            for t in range(config.n_trials)]
    return _run(_angle_distance_trial, config, jobs, workers)


def write_csv(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.as_row())


class CSVParseError(ValueError):
    pass


_PARSERS = {"N": int, "trial": int, "seed": int, "n_constraints": int, "iterations": int,
            "side": float, "sigma_a": float, "sigma_d": float, "discrepancy_mae": float,
            "accuracy_mse": float}


def read_csv(path) -> list[TrialRecord]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CSVParseError(f"{path}: line 1: empty file")
    if rows[0] != CSV_HEADER:
        raise CSVParseError(f"{path}: line 1: unexpected header {rows[0]}")
    if len(rows) == 1:
        raise CSVParseError(f"{path}: line 2: no data rows")
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_HEADER):
            raise CSVParseError(f"{path}: line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        values = dict(zip(CSV_HEADER, row))
        try:
            parsed = {k: _PARSERS[k](v) for k, v in values.items() if k in _PARSERS}
            if values["converged"] not in ("0", "1"):
                raise ValueError(f"converged must be 0 or 1, got {values['converged']!r}")
            parsed["converged"] = values["converged"] == "1"
            parsed["runtime_s"] = float(values["runtime_s"]) if values["runtime_s"] else None
        except ValueError as exc:
            raise CSVParseError(f"{path}: line {lineno}: {exc}") from None
        records.append(TrialRecord(experiment=values["experiment"], mode=values["mode"], **parsed))
    return records
