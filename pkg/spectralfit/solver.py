#!/usr/bin/env python3
"""
Masked projected-gradient solver.
Minimizes f(X) = 1/2 ||P_Omega(X - M)||_F^2 over a constraint set by
alternating a gradient step on the observed entries with a projection,
either with a fixed step or with greedy Armijo backtracking.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .core import ObservationSet, apply_mask, as_matrix, check_shape
from .projections import project
from .schema import ArmijoRule, Constraint, FixedStep, SolverConfig

logger = logging.getLogger(__name__)

# Trace monotonicity is checked with this slack, relative to max(1, errors[0]).
MONOTONE_SLACK = 1e-12


@dataclass
class IterationTrace:
    """Masked error after every iterate; errors[0] belongs to the starting point."""
    errors: List[float] = field(default_factory=list)
    steps: List[float] = field(default_factory=list)
    converged: bool = False
    armijo_failures: int = 0

    @property
    def iterations(self) -> int:
        return len(self.errors) - 1

    @property
    def final_error(self) -> float:
        return self.errors[-1]

    def is_monotone(self, slack: float = MONOTONE_SLACK) -> bool:
        if not self.errors:
            return True
        bound = slack * max(1.0, self.errors[0])
        return all(later <= earlier + bound for earlier, later in zip(self.errors, self.errors[1:]))


@dataclass(frozen=True, eq=False)
class ApproximationSolution:
    x: np.ndarray
    trace: IterationTrace


@dataclass(frozen=True, eq=False)
class ArmijoStep:
    """Outcome of one Armijo search; accepted is False when no halving passed the test."""
    x: np.ndarray
    mu: float
    halvings: int
    accepted: bool


def masked_error(x, m, omega: ObservationSet) -> float:
    """epsilon(X) = ||P_Omega X - P_Omega M||_F."""
    x = as_matrix(x, "x")
    m = as_matrix(m, "m")
    check_shape(x.shape, m.shape, "x and m")
    return float(np.linalg.norm(apply_mask(x - m, omega)))


def objective_value(x, m, omega: ObservationSet) -> float:
    return 0.5 * masked_error(x, m, omega) ** 2


def objective_gradient(x, m, omega: ObservationSet) -> np.ndarray:
    """Gradient of f at x: P_Omega(X - M)."""
    x = as_matrix(x, "x")
    m = as_matrix(m, "m")
    check_shape(x.shape, m.shape, "x and m")
    return apply_mask(x - m, omega)


def fixed_step_iterate(x, m, omega: ObservationSet, c: Constraint, mu: float = 1.0) -> np.ndarray:
    """X_{n+1} = D(X_n - mu P_Omega(X_n - M))."""
    x = as_matrix(x, "x")
    return project(x - mu * objective_gradient(x, m, omega), c).x


def armijo_step(x, m, omega: ObservationSet, c: Constraint, rule: Optional[ArmijoRule] = None) -> ArmijoStep:
    """Greedy Armijo rule: first j with f(Z_j) <= f(X) - sigma <grad, X - Z_j>.

    Z_j = D(X - mu_tilde 2^-j grad). When every halving fails, the candidate
    with the lowest f is returned, or X itself with the smallest tried step
    if none improves on it.
    """
    rule = rule or ArmijoRule()
    x = as_matrix(x, "x")
    m = as_matrix(m, "m")
    grad = objective_gradient(x, m, omega)
    f_x = objective_value(x, m, omega)

    best, best_f, best_mu, best_j = x, f_x, rule.mu_tilde * 2.0 ** -rule.max_halvings, rule.max_halvings
    for j in range(rule.max_halvings + 1):
        mu = rule.mu_tilde * 2.0 ** -j
        z = project(x - mu * grad, c).x
        f_z = objective_value(z, m, omega)
        if f_z <= f_x - rule.sigma * float(np.sum(grad * (x - z))):
            return ArmijoStep(x=z, mu=mu, halvings=j, accepted=True)
        if f_z < best_f:
            best, best_f, best_mu, best_j = z, f_z, mu, j

    logger.debug(f"[SOLVER] Armijo search exhausted {rule.max_halvings} halvings (f={f_x:.6g})")
    return ArmijoStep(x=best, mu=best_mu, halvings=best_j, accepted=False)


def resolve_tol(m, omega: ObservationSet, cfg: SolverConfig) -> float:
    """The absolute stopping threshold: cfg.tol, or cfg.tol_factor * max(1, ||P_Omega M||_F)."""
    if cfg.tol is not None:
        return cfg.tol
    return cfg.tol_factor * max(1.0, float(np.linalg.norm(apply_mask(m, omega))))


def solve_approximation(m, omega: ObservationSet, c: Constraint, cfg: Optional[SolverConfig] = None,
                        x0=None) -> ApproximationSolution:
    """Projected gradient on the masked data fit until the error or its change is small.

    Starts from D(P_Omega M), or from D(x0) when a warm start is given.
    Hitting max_iters is reported through trace.converged, never raised.
    """
    cfg = cfg or SolverConfig()
    m = as_matrix(m, "m")
    check_shape(m.shape, omega.shape, "matrix and observation set")
    tol = resolve_tol(m, omega, cfg)

    start = apply_mask(m, omega) if x0 is None else as_matrix(x0, "x0")
    check_shape(start.shape, m.shape, "x0 and m")
    x = project(start, c).x

    trace = IterationTrace(errors=[masked_error(x, m, omega)])
    stall = cfg.rel_tol * max(1.0, trace.errors[0])
    if trace.errors[0] <= tol:
        trace.converged = True
        logger.debug(f"[SOLVER] Starting point already within tol={tol:.3g}")
        return ApproximationSolution(x=x, trace=trace)

    mode = cfg.step_mode
    for n in range(1, cfg.max_iters + 1):
        if isinstance(mode, FixedStep):
            x = fixed_step_iterate(x, m, omega, c, mode.mu)
            mu = mode.mu
        else:
            step = armijo_step(x, m, omega, c, mode)
            if not step.accepted:
                trace.armijo_failures += 1
            x, mu = step.x, step.mu

        error = masked_error(x, m, omega)
        previous = trace.errors[-1]
        trace.errors.append(error)
        trace.steps.append(mu)
        logger.debug(f"[SOLVER] iter={n} error={error:.6e} mu={mu:.3g}")

        if error <= tol or abs(previous - error) <= stall:
            trace.converged = True
            break

    if trace.converged:
        logger.debug(f"[SOLVER] Converged after {trace.iterations} iterations, error={trace.final_error:.6e}")
    else:
        logger.info(f"[SOLVER] Stopped at max_iters={cfg.max_iters}, error={trace.final_error:.6e}")
    return ApproximationSolution(x=x, trace=trace)


def masked_frobenius_solution(m, omega: ObservationSet, lam: float) -> np.ndarray:
    """Closed-form minimizer over the Frobenius lam-ball: P_Omega M / ||P_Omega M||_F * lam.

    When ||P_Omega M||_F <= lam, P_Omega M itself fits exactly and is returned.
    """
    observed = apply_mask(m, omega)
    size = float(np.linalg.norm(observed))
    if size <= lam:
        return observed
    return observed * (lam / size)
