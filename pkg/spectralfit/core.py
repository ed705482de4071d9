#!/usr/bin/env python3
"""
Core matrix types shared by every other module.
Holds the observation set and its masking operator, the SVD adapter around
LAPACK, and the unitarily invariant norms used by projections and completion.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

# Singular values below RANK_RTOL * sigma_1 count as zero.
RANK_RTOL = 1e-12
NORM_KINDS = ("frobenius", "spectral", "nuclear", "kyfan")


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Return x as a finite, non-empty 2-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """The index set of known entries, stored as a read-only boolean mask."""
    rows: int
    cols: int
    mask: np.ndarray

    def __post_init__(self):
        """Validate dimensions and freeze a private copy of the mask."""
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"Observation set needs positive dimensions, got {self.rows}x{self.cols}")
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != (self.rows, self.cols):
            raise ValueError(f"Mask shape {mask.shape} does not match {self.rows}x{self.cols}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_indices(cls, rows: int, cols: int, indices: Iterable[Tuple[int, int]]) -> "ObservationSet":
        """Build an observation set from 0-based (i, j) pairs, rejecting duplicates."""
        mask = np.zeros((rows, cols), dtype=bool)
        for i, j in indices:
            i, j = int(i), int(j)
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"Index ({i}, {j}) outside {rows}x{cols} matrix")
            if mask[i, j]:
                raise ValueError(f"Duplicate index ({i}, {j})")
            mask[i, j] = True
        return cls(rows, cols, mask)

    @classmethod
    def full(cls, rows: int, cols: int) -> "ObservationSet":
        """Every entry observed."""
        return cls(rows, cols, np.ones((rows, cols), dtype=bool))

    @classmethod
    def empty(cls, rows: int, cols: int) -> "ObservationSet":
        """No entry observed."""
        return cls(rows, cols, np.zeros((rows, cols), dtype=bool))

    @property
    def shape(self) -> Tuple[int, int]:
        """(rows, cols) of the matrix this set indexes."""
        return (self.rows, self.cols)

    @property
    def observed(self) -> frozenset:
        """Observed pairs as a frozenset."""
        return frozenset(self.indices())

    def indices(self) -> List[Tuple[int, int]]:
        """Observed pairs in row-major order."""
        return [(int(i), int(j)) for i, j in np.argwhere(self.mask)]

    def __len__(self) -> int:
        """Number of observed entries."""
        return int(self.mask.sum())

    def __contains__(self, index) -> bool:
        """Whether (i, j) is observed."""
        i, j = index
        return 0 <= i < self.rows and 0 <= j < self.cols and bool(self.mask[i, j])

    def __eq__(self, other) -> bool:
        """Same shape and same observed entries."""
        if not isinstance(other, ObservationSet):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.mask, other.mask))

    def is_empty(self) -> bool:
        """Whether nothing is observed."""
        return not self.mask.any()

    def is_full(self) -> bool:
        """Whether every entry is observed."""
        return bool(self.mask.all())

    def missing_fraction(self) -> float:
        """Share of entries not observed."""
        return 1.0 - len(self) / (self.rows * self.cols)

    def complement(self) -> "ObservationSet":
        """The unobserved entries."""
        return ObservationSet(self.rows, self.cols, ~self.mask)

    def intersect(self, other: "ObservationSet") -> "ObservationSet":
        """Entries observed in both sets."""
        check_shape(self.shape, other.shape, "observation sets")
        return ObservationSet(self.rows, self.cols, self.mask & other.mask)


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Thin SVD: u is m x r, sigma has r entries, vt is r x n, r = min(m, n)."""
    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray

    def reconstruct(self, sigma: Optional[np.ndarray] = None) -> np.ndarray:
        """Multiply the factors back together, optionally with replaced singular values."""
        values = self.sigma if sigma is None else sigma
        return (self.u * values) @ self.vt

    def rank(self, rtol: float = RANK_RTOL) -> int:
        """Numerical rank of the factored matrix."""
        return numerical_rank(self.sigma, rtol)


def check_shape(left: Tuple[int, ...], right: Tuple[int, ...], what: str) -> None:
    """Raise ValueError naming what when two shapes differ."""
    if tuple(left) != tuple(right):
        raise ValueError(f"Shape mismatch between {what}: {tuple(left)} vs {tuple(right)}")


def apply_mask(x, omega: ObservationSet) -> np.ndarray:
    """P_Omega: keep observed entries of x, zero the rest."""
    arr = as_matrix(x)
    check_shape(arr.shape, omega.shape, "matrix and observation set")
    return np.where(omega.mask, arr, 0.0)


def svd(x) -> SvdFactors:
    """Thin SVD through LAPACK gesdd, retrying with gesvd if gesdd fails to converge."""
    arr = as_matrix(x)
    try:
        u, sigma, vt = scipy.linalg.svd(arr, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError as e:
        logger.warning(f"[SVD] gesdd failed on {arr.shape} matrix ({e}), retrying with gesvd")
        u, sigma, vt = scipy.linalg.svd(arr, full_matrices=False, lapack_driver="gesvd", check_finite=False)
    return SvdFactors(u=u, sigma=sigma, vt=vt)


def singular_values(x) -> np.ndarray:
    """Singular values only, nonincreasing."""
    arr = as_matrix(x)
    try:
        return scipy.linalg.svd(arr, compute_uv=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError as e:
        logger.warning(f"[SVD] gesdd failed on {arr.shape} matrix ({e}), retrying with gesvd")
        return scipy.linalg.svd(arr, compute_uv=False, lapack_driver="gesvd", check_finite=False)


def numerical_rank(sigma, rtol: float = RANK_RTOL) -> int:
    """Count singular values above rtol * sigma_1."""
    values = np.asarray(sigma, dtype=np.float64)
    if values.size == 0 or values[0] <= 0.0:
        return 0
    return int(np.count_nonzero(values > rtol * values[0]))


def check_kyfan_order(k, limit: int) -> int:
    """Validate a Ky-Fan order (or rank bound) against min(rows, cols)."""
    if k is None or isinstance(k, bool) or int(k) != k:
        raise ValueError(f"k must be an integer, got {k!r}")
    k = int(k)
    if not 1 <= k <= limit:
        raise ValueError(f"k must satisfy 1 <= k <= {limit}, got {k}")
    return k


def kyfan_from_sigma(sigma: np.ndarray, k: int) -> float:
    """Sum of the k largest of a nonincreasing spectrum."""
    return float(np.sum(sigma[:k]))


def norm(x, kind: str, k: Optional[int] = None) -> float:
    """Frobenius, spectral, nuclear or Ky-Fan k-norm of x."""
    arr = as_matrix(x)
    if kind not in NORM_KINDS:
        raise ValueError(f"Unknown norm kind '{kind}', expected one of {', '.join(NORM_KINDS)}")
    if kind == "frobenius":
        return float(np.linalg.norm(arr))
    sigma = singular_values(arr)
    if kind == "spectral":
        return kyfan_from_sigma(sigma, 1)
    if kind == "nuclear":
        return kyfan_from_sigma(sigma, sigma.size)
    return kyfan_from_sigma(sigma, check_kyfan_order(k, sigma.size))


def pinch(x) -> np.ndarray:
    """diag(X): zero every off-diagonal entry of a square matrix."""
    arr = as_matrix(x)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"Pinching is defined for square matrices, got shape {arr.shape}")
    return np.diag(np.diag(arr))
