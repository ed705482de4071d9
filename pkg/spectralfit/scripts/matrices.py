#!/usr/bin/env python3
"""
Random test matrices and observation sets.
"""

import numpy as np

from spectralfit.core import ObservationSet


def random_mask(rng, rows, cols, fraction):
    """Keep each entry with probability `fraction`; never empty."""
    mask = rng.random((rows, cols)) < fraction
    if not mask.any():
        mask[0, 0] = True
    return ObservationSet(rows, cols, mask)


def low_rank(rng, rows, cols, rank, scale=1.0):
    return scale * rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))


def orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def with_spectrum(rng, sigma, rows=None, cols=None):
    """U diag(sigma) V^T for random orthogonal U, V."""
    sigma = np.asarray(sigma, dtype=float)
    rows = rows or sigma.size
    cols = cols or sigma.size
    u = orthogonal(rng, rows)[:, :sigma.size]
    v = orthogonal(rng, cols)[:, :sigma.size]
    return (u * sigma) @ v.T
