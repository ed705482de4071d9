#!/usr/bin/env python3
"""
Matrix completion by bisection over the constraint radius.
Searches for the smallest norm ball whose masked approximant reproduces the
observed entries, solving one masked approximation per radius.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .core import ObservationSet, apply_mask, as_matrix, check_shape, norm
from .schema import CompletionConfig, ball_constraint
from .solver import masked_error, resolve_tol, solve_approximation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BisectionStep:
    lam: float
    error: float
    iterations: int
    solver_converged: bool


@dataclass(frozen=True, eq=False)
class CompletionResult:
    """Completed matrix and the radius lambda_star of the ball it was found in."""
    x: np.ndarray
    lambda_star: float
    bisection_history: List[BisectionStep] = field(default_factory=list)
    converged: bool = False
    error: float = 0.0
    norm_value: float = 0.0
    monotonicity_violations: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def bisections(self) -> int:
        return len(self.bisection_history)


def completable_norm_bound(m, omega: ObservationSet, norm_kind: str = "nuclear", k: Optional[int] = None) -> float:
    """||P_Omega M|| in the completion norm; P_Omega M is feasible, so lambda_star never exceeds it."""
    return norm(apply_mask(m, omega), norm_kind, k)


def _monotonicity_violations(history: List[BisectionStep], tol: float) -> List[Tuple[float, float]]:
    """Radius pairs (smaller, larger) where the larger ball fit worse by more than tol."""
    ordered = sorted(history, key=lambda s: s.lam)
    violations = []
    for i, small in enumerate(ordered):
        for large in ordered[i + 1:]:
            if large.lam > small.lam and large.error > small.error + tol:
                violations.append((small.lam, large.lam))
    return violations


def complete(m, omega: ObservationSet, cfg: Optional[CompletionConfig] = None) -> CompletionResult:
    """Bisection on lambda between 0 and ||P_Omega M||.

    Each pass solves the masked approximation in the lambda-ball, warm-started
    from the previous iterate. error > tol raises lambda_min, otherwise
    lambda_max drops to lambda and the iterate becomes the current witness.
    Stops once error < tol with lambda stable to lambda_tol, or once the
    bracket is narrower than lambda_tol.
    """
    cfg = cfg or CompletionConfig()
    m = as_matrix(m, "m")
    check_shape(m.shape, omega.shape, "matrix and observation set")
    if omega.is_empty():
        raise ValueError("Cannot complete a matrix with no observed entries")

    observed = apply_mask(m, omega)
    lam_max = completable_norm_bound(m, omega, cfg.norm, cfg.k)
    logger.info(f"[BISECT] {m.shape[0]}x{m.shape[1]} matrix, {len(omega)} observed, "
                f"{cfg.norm} bound lambda_max={lam_max:.6g}")
    if lam_max == 0.0:
        return CompletionResult(x=np.zeros_like(m), lambda_star=0.0, converged=True)

    inner_tol = min(resolve_tol(m, omega, cfg.solver), cfg.tol / 2.0)
    solver_cfg = replace(cfg.solver, tol=inner_tol)

    lam_min, lam = 0.0, 0.0
    best_x, best_lam = observed, lam_max
    warm: Optional[np.ndarray] = None
    history: List[BisectionStep] = []
    converged = False

    for _ in range(cfg.max_bisections):
        lam_prev = lam
        lam = 0.5 * (lam_min + lam_max)
        solution = solve_approximation(m, omega, ball_constraint(cfg.norm, lam, cfg.k), solver_cfg, x0=warm)
        error = solution.trace.final_error
        warm = solution.x
        history.append(BisectionStep(lam=lam, error=error, iterations=solution.trace.iterations,
                                     solver_converged=solution.trace.converged))
        logger.debug(f"[BISECT] step={len(history)} lambda={lam:.6g} error={error:.6e} "
                     f"iters={solution.trace.iterations}")

        if error > cfg.tol:
            lam_min = lam
        else:
            lam_max = lam
            best_x, best_lam = solution.x, lam

        if error < cfg.tol and abs(lam - lam_prev) < cfg.lambda_tol:
            converged = True
            break
        if lam_max - lam_min < cfg.lambda_tol:
            converged = True
            break

    if not converged:
        logger.warning(f"[BISECT] No convergence within {cfg.max_bisections} bisections, "
                       f"bracket [{lam_min:.6g}, {lam_max:.6g}]")

    violations = _monotonicity_violations(history, cfg.tol)
    for small, large in violations:
        logger.warning(f"[BISECT] Error grew from lambda={small:.6g} to lambda={large:.6g}; "
                       f"inner solver likely did not converge")

    result = CompletionResult(
        x=best_x,
        lambda_star=best_lam,
        bisection_history=history,
        converged=converged,
        error=masked_error(best_x, m, omega),
        norm_value=norm(best_x, cfg.norm, cfg.k),
        monotonicity_violations=violations,
    )
    logger.info(f"[BISECT] lambda_star={result.lambda_star:.6g} error={result.error:.3e} "
                f"after {result.bisections} bisections")
    return result
