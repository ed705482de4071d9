"""Masked matrix approximation and completion under spectral constraints."""

from .completion import CompletionResult, complete, completable_norm_bound
from .core import ObservationSet, apply_mask, norm, pinch, svd
from .projections import ProjectionResult, project
from .schema import (
    CompletionConfig,
    FrobeniusBall,
    KyFanBall,
    NuclearBall,
    Orthonormal,
    RankAtMost,
    ScaledOrthonormal,
    SolverConfig,
    SpectralBall,
)
from .solver import ApproximationSolution, masked_error, solve_approximation

__version__ = "0.1.0"
