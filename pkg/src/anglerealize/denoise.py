"""Projection of noisy angles onto the realizable set.

Solves min 1/2 |theta - theta_noisy|^2 subject to A theta = b and the quad
sine-law constraints by an augmented-Lagrangian method using the analytic
quad Jacobians and Hessians. Internally each quad constraint is imposed as
log(f_k + 1) = 0; reported violations use f_k itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import LinearConstraintSystem, QuadrilateralConstraintSet
from .errors import NumericalFailureError
from .geometry import AngleVector

INITIAL_PENALTY = 0.1


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 500
    constraint_tolerance: float = 1e-8
    step_tolerance: float = 1e-10
    bound_margin: float = 1e-6
    restore: bool = True

    def __post_init__(self):
        if min(self.constraint_tolerance, self.step_tolerance, self.bound_margin) <= 0:
            raise ValueError("solver tolerances must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")


@dataclass(frozen=True)
class DenoiseProblem:
    noisy_angles: AngleVector
    linear: LinearConstraintSystem
    quads: QuadrilateralConstraintSet
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        m = len(self.noisy_angles)
        if self.linear.n_angles != m:
            raise ValueError(f"linear system is over {self.linear.n_angles} angles, expected {m}")
        if len(self.quads) and self.quads.n_points != self.noisy_angles.n_points:
            raise ValueError("quad set built for a different number of points")

    @property
    def n_constraints(self) -> int:
        return self.linear.n_rows + len(self.quads)


@dataclass(frozen=True)
class DenoiseResult:
    denoised_angles: AngleVector
    converged: bool
    iterations: int
    constraint_violation: float
    objective: float
    message: str = ""


def _log_quad_hessian_weighted(values, quads, weights):
    """Sum_k w_k * Hessian(log(f_k + 1)); diagonal since each term is separable."""
    diag = np.zeros(len(values))
    if len(quads):
        csc2 = 1.0 / np.sin(values) ** 2
        np.add.at(diag, quads.num_index, -weights[:, None] * csc2[quads.num_index])
        np.add.at(diag, quads.den_index, weights[:, None] * csc2[quads.den_index])
    return np.diag(diag)


class _Solver:
    """Method of multipliers with damped Newton inner solves.

    Redundant quad constraints (their gradients become dependent on the
    realizable set) leave the multipliers non-unique, which plain SQP steps
    handle poorly; the augmented Lagrangian is indifferent to it.
    """

    def __init__(self, problem: DenoiseProblem):
        self.p = problem
        self.opts = problem.options
        self.target = problem.noisy_angles.values
        self.lo = problem.options.bound_margin
        self.hi = np.pi - problem.options.bound_margin
        self.a = problem.linear.a_matrix
        self.b = problem.linear.b_vector
        self.n_lin = self.a.shape[0]
        self.newton_steps = 0

    def clamp(self, x):
        return np.clip(x, self.lo, self.hi)

    # the quads enter in log form: same zero set, far milder curvature
    def cons(self, x):
        return np.r_[self.a @ x - self.b, self.p.quads.log_residuals(x)]

    def jac(self, x):
        return np.vstack([self.a, self.p.quads.log_jacobian(x)])

    def violation(self, x):
        c = np.r_[self.a @ x - self.b, self.p.quads.residuals(x)]
        return float(np.max(np.abs(c), initial=0.0))

    def obj(self, x):
        return 0.5 * float(np.sum((x - self.target) ** 2))

    def aug(self, x, lam, rho):
        c = self.cons(x)
        return self.obj(x) + float(lam @ c) + 0.5 * rho * float(c @ c)

    def minimize_inner(self, x, lam, rho, grad_tol):
        while self.newton_steps < self.opts.max_iterations:
            c = self.cons(x)
            j = self.jac(x)
            w = lam + rho * c
            grad = (x - self.target) + j.T @ w
            free = ~(((x <= self.lo) & (grad > 0)) | ((x >= self.hi) & (grad < 0)))
            if np.max(np.abs(grad[free]), initial=0.0) <= grad_tol:
                return x, True
            hess = (np.eye(len(x)) + rho * j.T @ j
                    + _log_quad_hessian_weighted(x, self.p.quads, w[self.n_lin:]))
            # Newton step over the variables not held at a bound
            evals, evecs = np.linalg.eigh(hess[np.ix_(free, free)])
            evals = np.maximum(evals, 1e-3)
            d = np.zeros_like(x)
            d[free] = -evecs @ ((evecs.T @ grad[free]) / evals)
            d[((x <= self.lo) & (d < 0)) | ((x >= self.hi) & (d > 0))] = 0.0
            if not np.all(np.isfinite(d)):
                raise NumericalFailureError("non-finite Newton direction")
            phi0 = self.obj(x) + float(lam @ c) + 0.5 * rho * float(c @ c)
            alpha = self._max_step(x, d)
            # near the minimizer the predicted decrease drops below roundoff in phi
            slack = 64 * np.finfo(float).eps * abs(phi0)
            for _ in range(60):
                trial = self.clamp(x + alpha * d)
                phi = self.aug(trial, lam, rho)
                if np.isfinite(phi) and phi <= phi0 + 1e-4 * float(grad @ (trial - x)) + slack:
                    break
                alpha *= 0.5
            else:
                return x, False
            if np.array_equal(trial, x):
                return x, False
            self.newton_steps += 1
            x = trial
            if float(np.max(np.abs(d))) <= self.opts.step_tolerance:
                return x, True
        return x, False

    def _max_step(self, x, d):
        # an iterate may close at most half its distance to either bound
        with np.errstate(divide="ignore", invalid="ignore"):
            down = np.where(d < 0, 0.5 * (x - self.lo) / -d, np.inf)
            up = np.where(d > 0, 0.5 * (self.hi - x) / d, np.inf)
        return float(min(1.0, down.min(initial=np.inf), up.min(initial=np.inf)))

    def solve(self, initial=None) -> DenoiseResult:
        opts = self.opts
        x = self.clamp(np.array(self.target if initial is None else initial, dtype=float))
        if not np.isfinite(self.obj(x)):
            raise NumericalFailureError("objective is not finite")
        n_cons = self.p.n_constraints
        if n_cons == 0:
            return self._result(x, True, "no constraints")
        lam = np.zeros(n_cons)
        rho = INITIAL_PENALTY
        viol_prev = np.inf
        while True:
            viol = float(np.max(np.abs(self.cons(x))))
            x, inner_ok = self.minimize_inner(x, lam, rho, grad_tol=max(1e-11, 1e-3 * min(viol, 1.0)))
            c = self.cons(x)
            viol = float(np.max(np.abs(c)))
            if not np.isfinite(viol):
                raise NumericalFailureError("constraint residual is not finite")
            lam = lam + rho * c
            if self.violation(x) <= opts.constraint_tolerance and inner_ok and self._stationary(x, lam):
                return self._result(x, True, "converged")
            if self.newton_steps >= opts.max_iterations:
                return self._result(x, False, "iteration limit reached")
            if rho >= 1e12:
                return self._result(x, False, "penalty limit reached")
            if viol > 0.25 * viol_prev:
                rho *= 10.0
            viol_prev = viol

    def _stationary(self, x, lam):
        grad = (x - self.target) + self.jac(x).T @ lam
        free = (x > self.lo) & (x < self.hi)
        return float(np.max(np.abs(grad[free]), initial=0.0)) <= 1e-8

    def _result(self, x, converged, message):
        viol = self.violation(x)
        obj = float(np.linalg.norm(x - self.target))
        if not np.isfinite(obj):
            raise NumericalFailureError("objective is not finite")
        return DenoiseResult(AngleVector(self.p.noisy_angles.indexer, x), converged,
                             self.newton_steps, viol, obj, message)


def denoise(problem: DenoiseProblem, initial=None) -> DenoiseResult:
    """Closest angle vector (Euclidean) satisfying the problem's constraints.

    Starts from the clamped noisy angles unless ``initial`` is given. If that
    run fails and ``options.restore`` is set, the solve is repeated from a
    realizable start: the linear-only projection, rebuilt into points and
    re-measured. Never raises on non-convergence; check ``result.converged``.
    """
    first = _Solver(problem).solve(initial)
    if first.converged or not problem.options.restore or not len(problem.quads):
        return first
    start = _restoration_start(problem)
    if start is None:
        return first
    second = _Solver(problem).solve(start)
    merged_iterations = first.iterations + second.iterations
    best = second if (second.converged or second.constraint_violation < first.constraint_violation) else first
    message = best.message if best is first else f"{best.message} after restart"
    return replace(best, iterations=merged_iterations, message=message)


def _restoration_start(problem):
    from .reconstruction import build_up
    from .errors import ReconstructionError
    from .geometry import _all_angles
    linear_only = replace(problem, quads=QuadrilateralConstraintSet(problem.quads.n_points, ()))
    projected = _Solver(linear_only).solve()
    try:
        rebuilt = build_up(projected.denoised_angles)
    except ReconstructionError:
        return None
    return _all_angles(rebuilt.points)


def prefix_problem(problem: DenoiseProblem, count: int) -> DenoiseProblem:
    """Keep the first ``count`` constraints: linear rows first, then quads."""
    n_lin = problem.linear.n_rows
    if not 0 <= count <= problem.n_constraints:
        raise ValueError(f"constraint count {count} outside [0, {problem.n_constraints}]")
    return replace(problem, linear=problem.linear.prefix(min(count, n_lin)),
                   quads=problem.quads.prefix(max(0, count - n_lin)))


def denoise_with_constraint_prefix(problem: DenoiseProblem, count: int, initial=None) -> DenoiseResult:
    return denoise(prefix_problem(problem, count), initial)
