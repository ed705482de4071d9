#!/usr/bin/env python3
"""
Constraint and configuration schema definitions.
Defines the constraint taxonomy that selects a projection, and the solver and
completion settings, as validated dataclasses with factory helpers.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, ClassVar, Dict, Optional, Tuple, Union

from .core import check_kyfan_order

CONSTRAINT_KINDS = ("frobenius", "spectral", "nuclear", "kyfan", "rank", "orthonormal", "scaled-orthonormal")
COMPLETION_NORMS = ("nuclear", "spectral", "kyfan")

DEFAULT_TOL_FACTOR = 1e-6
DEFAULT_REL_TOL = 1e-10
DEFAULT_MAX_ITERS = 5000
DEFAULT_ARMIJO_SIGMA = 0.1
DEFAULT_MU_TILDE = 1.0
DEFAULT_MAX_HALVINGS = 30
DEFAULT_COMPLETION_TOL = 1e-6
DEFAULT_LAMBDA_TOL = 1e-4
DEFAULT_MAX_BISECTIONS = 60


def check_radius(lam) -> None:
    if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not math.isfinite(lam) or lam <= 0:
        raise ValueError(f"Constraint radius lambda must be a positive finite number, got {lam!r}")


def _check_order(k) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValueError(f"Constraint order k must be a positive integer, got {k!r}")


@dataclass(frozen=True)
class Constraint:
    """Base of the constraint taxonomy; `kind` names the projection to route to."""
    kind: ClassVar[str] = ""
    convex: ClassVar[bool] = True

    def validate_for(self, shape: Tuple[int, int]) -> None:
        """Check parameters that depend on the matrix shape."""

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class FrobeniusBall(Constraint):
    lam: float
    kind: ClassVar[str] = "frobenius"

    def __post_init__(self):
        check_radius(self.lam)


@dataclass(frozen=True)
class SpectralBall(Constraint):
    lam: float
    kind: ClassVar[str] = "spectral"

    def __post_init__(self):
        check_radius(self.lam)


@dataclass(frozen=True)
class NuclearBall(Constraint):
    lam: float
    kind: ClassVar[str] = "nuclear"

    def __post_init__(self):
        check_radius(self.lam)


@dataclass(frozen=True)
class KyFanBall(Constraint):
    """Sum of the k largest singular values at most lam."""
    k: int
    lam: float
    kind: ClassVar[str] = "kyfan"

    def __post_init__(self):
        _check_order(self.k)
        check_radius(self.lam)

    def validate_for(self, shape: Tuple[int, int]) -> None:
        check_kyfan_order(self.k, min(shape))


@dataclass(frozen=True)
class RankAtMost(Constraint):
    k: int
    kind: ClassVar[str] = "rank"
    convex: ClassVar[bool] = False

    def __post_init__(self):
        _check_order(self.k)

    def validate_for(self, shape: Tuple[int, int]) -> None:
        check_kyfan_order(self.k, min(shape))


@dataclass(frozen=True)
class Orthonormal(Constraint):
    """Orthonormal columns, X^T X = I."""
    kind: ClassVar[str] = "orthonormal"
    convex: ClassVar[bool] = False

    def validate_for(self, shape: Tuple[int, int]) -> None:
        if shape[0] < shape[1]:
            raise ValueError(f"Orthonormal columns need rows >= cols, got shape {tuple(shape)}")


@dataclass(frozen=True)
class ScaledOrthonormal(Constraint):
    """Orthogonal columns with known lengths, X^T X = diag(scales)^2."""
    scales: Tuple[float, ...]
    kind: ClassVar[str] = "scaled-orthonormal"
    convex: ClassVar[bool] = False

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        if not scales or not all(math.isfinite(s) and s > 0 for s in scales):
            raise ValueError(f"Column scales must be positive finite numbers, got {self.scales!r}")
        object.__setattr__(self, "scales", scales)

    def validate_for(self, shape: Tuple[int, int]) -> None:
        if shape[0] < shape[1]:
            raise ValueError(f"Orthogonal columns need rows >= cols, got shape {tuple(shape)}")
        if len(self.scales) != shape[1]:
            raise ValueError(f"Expected {shape[1]} column scales, got {len(self.scales)}")


@dataclass(frozen=True)
class FixedStep:
    """Constant step size mu (the unit step by default)."""
    mu: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"Step size mu must be positive, got {self.mu!r}")


@dataclass(frozen=True)
class ArmijoRule:
    """Greedy Armijo backtracking: mu = mu_tilde * 2^-j for the first acceptable j."""
    sigma: float = DEFAULT_ARMIJO_SIGMA
    mu_tilde: float = DEFAULT_MU_TILDE
    max_halvings: int = DEFAULT_MAX_HALVINGS

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError(f"Armijo sigma must lie in (0, 1), got {self.sigma!r}")
        if not (math.isfinite(self.mu_tilde) and self.mu_tilde > 0):
            raise ValueError(f"Armijo mu_tilde must be positive, got {self.mu_tilde!r}")
        if isinstance(self.max_halvings, bool) or not isinstance(self.max_halvings, int) or self.max_halvings < 0:
            raise ValueError(f"Armijo max_halvings must be a non-negative integer, got {self.max_halvings!r}")


StepMode = Union[FixedStep, ArmijoRule]


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the masked projected-gradient iteration.

    tol=None means tol_factor * max(1, ||P_Omega M||_F), resolved per problem.
    """
    step_mode: StepMode = field(default_factory=FixedStep)
    tol: Optional[float] = None
    rel_tol: float = DEFAULT_REL_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    tol_factor: float = DEFAULT_TOL_FACTOR

    def __post_init__(self):
        if not isinstance(self.step_mode, (FixedStep, ArmijoRule)):
            raise ValueError(f"Unknown step mode {self.step_mode!r}")
        if self.tol is not None and not (math.isfinite(self.tol) and self.tol > 0):
            raise ValueError(f"Solver tol must be positive, got {self.tol!r}")
        if not (math.isfinite(self.rel_tol) and self.rel_tol > 0):
            raise ValueError(f"Solver rel_tol must be positive, got {self.rel_tol!r}")
        if isinstance(self.max_iters, bool) or not isinstance(self.max_iters, int) or self.max_iters < 1:
            raise ValueError(f"Solver max_iters must be a positive integer, got {self.max_iters!r}")
        if not (math.isfinite(self.tol_factor) and self.tol_factor > 0):
            raise ValueError(f"Solver tol_factor must be positive, got {self.tol_factor!r}")


@dataclass(frozen=True)
class CompletionConfig:
    """Settings for bisection completion over the constraint radius."""
    norm: str = "nuclear"
    k: Optional[int] = None
    tol: float = DEFAULT_COMPLETION_TOL
    lambda_tol: float = DEFAULT_LAMBDA_TOL
    max_bisections: int = DEFAULT_MAX_BISECTIONS
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.norm not in COMPLETION_NORMS:
            raise ValueError(f"Completion norm must be one of {', '.join(COMPLETION_NORMS)}, got {self.norm!r}")
        if self.norm == "kyfan":
            _check_order(self.k)
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise ValueError(f"Completion tol must be positive, got {self.tol!r}")
        if not (math.isfinite(self.lambda_tol) and self.lambda_tol > 0):
            raise ValueError(f"Completion lambda_tol must be positive, got {self.lambda_tol!r}")
        if isinstance(self.max_bisections, bool) or not isinstance(self.max_bisections, int) or self.max_bisections < 1:
            raise ValueError(f"Completion max_bisections must be a positive integer, got {self.max_bisections!r}")


def create_constraint(kind: str, lam: Optional[float] = None, k: Optional[int] = None,
                      scales: Optional[Tuple[float, ...]] = None) -> Constraint:
    """Create a constraint from its kind name and the parameters that kind needs."""
    if kind not in CONSTRAINT_KINDS:
        raise ValueError(f"Unknown constraint kind '{kind}', expected one of {', '.join(CONSTRAINT_KINDS)}")
    if kind in ("frobenius", "spectral", "nuclear", "kyfan") and lam is None:
        raise ValueError(f"Constraint '{kind}' requires lambda")
    if kind in ("kyfan", "rank") and k is None:
        raise ValueError(f"Constraint '{kind}' requires k")
    if kind == "scaled-orthonormal" and not scales:
        raise ValueError("Constraint 'scaled-orthonormal' requires column scales")
    if kind == "frobenius":
        return FrobeniusBall(lam)
    if kind == "spectral":
        return SpectralBall(lam)
    if kind == "nuclear":
        return NuclearBall(lam)
    if kind == "kyfan":
        return KyFanBall(k, lam)
    if kind == "rank":
        return RankAtMost(k)
    if kind == "orthonormal":
        return Orthonormal()
    return ScaledOrthonormal(tuple(scales))


def ball_constraint(norm: str, lam: float, k: Optional[int] = None) -> Constraint:
    """The lam-ball of a completion norm."""
    if norm == "nuclear":
        return NuclearBall(lam)
    if norm == "spectral":
        return SpectralBall(lam)
    if norm == "kyfan":
        return KyFanBall(k, lam)
    raise ValueError(f"No ball constraint for norm '{norm}'")


def encode_constraint(constraint: Constraint) -> str:
    """Encode a constraint to a compact JSON string."""
    return json.dumps(constraint.to_dict(), separators=(",", ":"))
