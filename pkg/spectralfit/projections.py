#!/usr/bin/env python3
"""
Projection operators onto spectral constraint sets.
Each operator maps a matrix to its nearest point, in Frobenius distance, of
one constraint set. The ball projections act on singular values only; the
orthogonality constraints are solved as Procrustes problems. Handlers are
registered with a Router so `project` can dispatch on the constraint kind.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .core import as_matrix, check_kyfan_order, kyfan_from_sigma, numerical_rank, singular_values, svd
from .router import Router
from .schema import (
    Constraint,
    FrobeniusBall,
    KyFanBall,
    NuclearBall,
    Orthonormal,
    RankAtMost,
    ScaledOrthonormal,
    SpectralBall,
    check_radius,
)

logger = logging.getLogger(__name__)

# Relative slack when deciding whether the input already lies in the set.
ACTIVE_RTOL = 1e-12
FEASIBLE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Projected matrix; active is False when the input was returned untouched."""
    x: np.ndarray
    active: bool
    unique: bool = True


def _check_sigma(sigma) -> np.ndarray:
    values = np.asarray(sigma, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError(f"Singular values must be a non-empty vector, got shape {values.shape}")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValueError("Singular values must be finite and nonnegative")
    if np.any(np.diff(values) > 0):
        raise ValueError("Singular values must be sorted nonincreasing")
    return values


def _inside(measure: float, lam: float) -> bool:
    return measure <= lam * (1.0 + ACTIVE_RTOL)


def project_singular_values_spectral(sigma, lam: float) -> np.ndarray:
    """Cap every singular value at lam."""
    values = _check_sigma(sigma)
    check_radius(lam)
    return np.minimum(values, lam)


def project_singular_values_nuclear(sigma, lam: float) -> np.ndarray:
    """Nearest nonnegative vector with sum at most lam: soft-threshold by theta.

    sigma arrives sorted, so theta comes from the last breakpoint rho with
    sigma_rho > (sum_{i<=rho} sigma_i - lam) / rho.
    """
    values = _check_sigma(sigma)
    check_radius(lam)
    if values.sum() <= lam:
        return values.copy()
    thresholds = (np.cumsum(values) - lam) / np.arange(1, values.size + 1)
    support = np.nonzero(values > thresholds)[0][-1]
    theta = thresholds[support]
    return np.maximum(values - theta, 0.0)


def _top_k_sum(values: np.ndarray, k: int) -> float:
    return float(np.sort(values)[::-1][:k].sum())


def _kyfan_candidates(values: np.ndarray, k: int, lam: float):
    """KKT candidate points for the Ky-Fan singular-value projection.

    With the multiplier theta active, the minimizer has a top block
    y_i = sigma_i - theta (i <= p), a tie block y_i = c (p < i <= q) holding the
    k-th value, and sigma_i untouched below; or, when c hits zero, the top
    block followed by zeros.
    """
    n = values.size
    prefix = np.concatenate(([0.0], np.cumsum(values)))
    for p in range(k):
        r = k - p
        head = prefix[p]
        for q in range(k, n + 1):
            t = q - p
            block = prefix[q] - head
            c = (r * lam - r * head + p * block) / (p * t + r * r)
            theta = (block - t * c) / r
            yield np.concatenate((values[:p] - theta, np.full(t, c), values[q:]))
    for p in range(1, k + 1):
        theta = (prefix[p] - lam) / p
        yield np.concatenate((values[:p] - theta, np.zeros(n - p)))


def project_singular_values_kyfan(sigma, k: int, lam: float) -> np.ndarray:
    """Nearest nonnegative vector whose k largest entries sum to at most lam.

    k = 1 is the spectral cap and k = len(sigma) the nuclear soft-threshold.
    Otherwise every KKT candidate structure is enumerated and the closest
    feasible candidate wins; the true minimizer is always among them.
    """
    values = _check_sigma(sigma)
    check_radius(lam)
    k = check_kyfan_order(k, values.size)
    if k == 1:
        return project_singular_values_spectral(values, lam)
    if k == values.size:
        return project_singular_values_nuclear(values, lam)
    if kyfan_from_sigma(values, k) <= lam:
        return values.copy()

    slack = ACTIVE_RTOL * max(1.0, lam)
    best, best_gap = None, np.inf
    for candidate in _kyfan_candidates(values, k, lam):
        if candidate.min() < -slack:
            continue
        candidate = np.maximum(candidate, 0.0)
        if _top_k_sum(candidate, k) > lam + slack:
            continue
        gap = float(np.sum((candidate - values) ** 2))
        if gap < best_gap:
            best, best_gap = candidate, gap
    if best is None:
        # Only reachable through rounding; scaling onto the boundary stays feasible.
        logger.warning(f"[PROJECT] No Ky-Fan candidate passed the feasibility check (k={k}, lambda={lam})")
        best = values * (lam / kyfan_from_sigma(values, k))
    return np.minimum.accumulate(best)


def project_frobenius_ball(m, lam: float) -> ProjectionResult:
    """X = M / ||M||_F * min(||M||_F, lam)."""
    m = as_matrix(m)
    check_radius(lam)
    size = float(np.linalg.norm(m))
    if _inside(size, lam):
        return ProjectionResult(x=m, active=False)
    return ProjectionResult(x=m * (lam / size), active=True)


def project_spectral_ball(m, lam: float) -> ProjectionResult:
    """Cap every singular value at lam."""
    m = as_matrix(m)
    check_radius(lam)
    factors = svd(m)
    if _inside(factors.sigma[0], lam):
        return ProjectionResult(x=m, active=False)
    return ProjectionResult(x=factors.reconstruct(np.minimum(factors.sigma, lam)), active=True)


def project_nuclear_ball(m, lam: float) -> ProjectionResult:
    """Soft-threshold the singular values so they sum to lam."""
    m = as_matrix(m)
    check_radius(lam)
    factors = svd(m)
    if _inside(float(factors.sigma.sum()), lam):
        return ProjectionResult(x=m, active=False)
    return ProjectionResult(x=factors.reconstruct(project_singular_values_nuclear(factors.sigma, lam)), active=True)


def project_kyfan_ball(m, k: int, lam: float) -> ProjectionResult:
    """Nearest matrix whose k largest singular values sum to at most lam."""
    m = as_matrix(m)
    check_radius(lam)
    k = check_kyfan_order(k, min(m.shape))
    if k == 1:
        return project_spectral_ball(m, lam)
    if k == min(m.shape):
        return project_nuclear_ball(m, lam)
    factors = svd(m)
    if _inside(kyfan_from_sigma(factors.sigma, k), lam):
        return ProjectionResult(x=m, active=False)
    return ProjectionResult(x=factors.reconstruct(project_singular_values_kyfan(factors.sigma, k, lam)), active=True)


def project_rank(m, k: int) -> ProjectionResult:
    """Truncated SVD keeping the k largest singular values."""
    m = as_matrix(m)
    k = check_kyfan_order(k, min(m.shape))
    factors = svd(m)
    if factors.rank() <= k:
        return ProjectionResult(x=m, active=False)
    return ProjectionResult(x=(factors.u[:, :k] * factors.sigma[:k]) @ factors.vt[:k], active=True)


def _procrustes(m: np.ndarray):
    """SVD of a tall matrix, and whether its Procrustes factor is unique."""
    if m.shape[0] < m.shape[1]:
        raise ValueError(f"Orthonormal columns need rows >= cols, got shape {m.shape}")
    factors = svd(m)
    unique = factors.rank() == m.shape[1]
    if not unique:
        logger.warning(f"[PROJECT] Rank-deficient input {m.shape}: nearest orthonormal matrix is not unique")
    return factors, unique


def project_orthonormal(m) -> ProjectionResult:
    """Orthogonal Procrustes: X = U V^T from the SVD of M."""
    m = as_matrix(m)
    factors, unique = _procrustes(m)
    if np.all(np.abs(factors.sigma - 1.0) <= ACTIVE_RTOL):
        return ProjectionResult(x=m, active=False)
    return ProjectionResult(x=factors.u @ factors.vt, active=True, unique=unique)


def project_scaled_orthonormal(m, scales) -> ProjectionResult:
    """Nearest X with X^T X = D^2, D = diag(scales): X = Q D with Q = U V^T of M D."""
    m = as_matrix(m)
    d = np.asarray(scales, dtype=np.float64)
    if d.shape != (m.shape[1],) or np.any(d <= 0):
        raise ValueError(f"Expected {m.shape[1]} positive column scales, got {tuple(np.atleast_1d(d))}")
    if np.all(np.abs(singular_values(m / d) - 1.0) <= ACTIVE_RTOL):
        return ProjectionResult(x=m, active=False)
    factors, unique = _procrustes(m * d)
    return ProjectionResult(x=(factors.u @ factors.vt) * d, active=True, unique=unique)


def constraint_measure(x, constraint: Constraint) -> float:
    """The quantity a constraint bounds, evaluated at x."""
    x = as_matrix(x)
    if isinstance(constraint, FrobeniusBall):
        return float(np.linalg.norm(x))
    if isinstance(constraint, (SpectralBall, NuclearBall, KyFanBall, RankAtMost)):
        sigma = singular_values(x)
        if isinstance(constraint, SpectralBall):
            return kyfan_from_sigma(sigma, 1)
        if isinstance(constraint, NuclearBall):
            return kyfan_from_sigma(sigma, sigma.size)
        if isinstance(constraint, KyFanBall):
            return kyfan_from_sigma(sigma, constraint.k)
        return float(numerical_rank(sigma))
    if isinstance(constraint, Orthonormal):
        return float(np.linalg.norm(x.T @ x - np.eye(x.shape[1])))
    if isinstance(constraint, ScaledOrthonormal):
        return float(np.linalg.norm(x.T @ x - np.diag(np.square(constraint.scales))))
    raise ValueError(f"Unknown constraint kind: {getattr(constraint, 'kind', constraint)!r}")


def is_feasible(x, constraint: Constraint, rtol: float = FEASIBLE_RTOL) -> bool:
    """Whether x satisfies the constraint within relative tolerance rtol."""
    measure = constraint_measure(x, constraint)
    if isinstance(constraint, RankAtMost):
        return measure <= constraint.k
    if isinstance(constraint, Orthonormal):
        return measure <= rtol * max(1.0, np.sqrt(x.shape[1]))
    if isinstance(constraint, ScaledOrthonormal):
        return measure <= rtol * max(1.0, float(np.linalg.norm(np.square(constraint.scales))))
    return measure <= constraint.lam * (1.0 + rtol)


def handle_frobenius(m: np.ndarray, constraint: FrobeniusBall) -> ProjectionResult:
    """Handle frobenius constraint."""
    return project_frobenius_ball(m, constraint.lam)


def handle_spectral(m: np.ndarray, constraint: SpectralBall) -> ProjectionResult:
    """Handle spectral constraint."""
    return project_spectral_ball(m, constraint.lam)


def handle_nuclear(m: np.ndarray, constraint: NuclearBall) -> ProjectionResult:
    """Handle nuclear constraint."""
    return project_nuclear_ball(m, constraint.lam)


def handle_kyfan(m: np.ndarray, constraint: KyFanBall) -> ProjectionResult:
    """Handle kyfan constraint."""
    return project_kyfan_ball(m, constraint.k, constraint.lam)


def handle_rank(m: np.ndarray, constraint: RankAtMost) -> ProjectionResult:
    """Handle rank constraint."""
    return project_rank(m, constraint.k)


def handle_orthonormal(m: np.ndarray, constraint: Orthonormal) -> ProjectionResult:
    """Handle orthonormal constraint."""
    return project_orthonormal(m)


def handle_scaled_orthonormal(m: np.ndarray, constraint: ScaledOrthonormal) -> ProjectionResult:
    """Handle scaled-orthonormal constraint."""
    return project_scaled_orthonormal(m, constraint.scales)


def register_all(router: Router) -> None:
    """Register every projection handler with the router."""
    router.register(FrobeniusBall.kind, handle_frobenius)
    router.register(SpectralBall.kind, handle_spectral)
    router.register(NuclearBall.kind, handle_nuclear)
    router.register(KyFanBall.kind, handle_kyfan)
    router.register(RankAtMost.kind, handle_rank)
    router.register(Orthonormal.kind, handle_orthonormal)
    router.register(ScaledOrthonormal.kind, handle_scaled_orthonormal)
    logger.debug("[ROUTER] All projection handlers registered")


router = Router()
register_all(router)


def project(m, constraint: Constraint) -> ProjectionResult:
    """Project m onto the set named by the constraint."""
    return router.route(as_matrix(m), constraint)
