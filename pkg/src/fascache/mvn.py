"""Multivariate normal CDF over (-inf, b] rectangles.

Implements the Genz separation-of-variables transform: after a Cholesky
factorization of the correlation matrix the probability becomes an
integral over the unit cube of dimension N-1, which is estimated with a
randomly shifted rank-1 lattice (square-root-of-primes generator, baker
transform) over K independent shifts.  The spread across shifts gives an
honest error estimate; the point count doubles until the estimate meets
the requested tolerance or a hard budget runs out.

Everything is deterministic for a fixed seed: the shifts come from a
counter-based Philox stream keyed by the seed, and all inner reductions
are fixed-order elementwise operations (no threaded BLAS in the loop).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .correlation import CorrelationMatrix, _cholesky_lower
from .specfun import NumericsError

__all__ = ["MvnResult", "mvn_cdf", "mvn_cdf_equicoordinate"]

DEFAULT_TOL = 1e-4
POINT_BUDGET = 1 << 22
_NUM_SHIFTS = 12
_FIRST_LEVEL = 128
# arguments to the inner normal quantile are kept inside (0, 1)
_UEPS = 1e-300
_UTOP = 1.0 - 1e-16


@dataclass(frozen=True)
class MvnResult:
    """Estimate of P(Z <= b) with its error bar.

    ``error_estimate`` is three standard errors across the random shifts
    (zero when the value is exact).  ``converged`` is False when the
    point budget ran out before the tolerance was met.
    """

    value: float
    error_estimate: float
    points_used: int
    converged: bool = True


def _primes(count: int) -> np.ndarray:
    """First ``count`` primes by a small sieve."""
    if count <= 0:
        return np.array([], dtype=np.int64)
    bound = max(16, int(count * (math.log(count + 2) + math.log(math.log(count + 3)))) + 10)
    while True:
        sieve = np.ones(bound + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, int(bound**0.5) + 1):
            if sieve[p]:
                sieve[p * p :: p] = False
        found = np.flatnonzero(sieve)
        if found.size >= count:
            return found[:count].astype(np.int64)
        bound *= 2


def _genz_products(
    chol: np.ndarray, b: np.ndarray, u: np.ndarray
) -> np.ndarray:
    """Evaluate the transformed integrand at each unit-cube point.

    ``u`` has shape (points, N-1); returns the per-point product of
    conditional one-dimensional probabilities.
    """
    npts = u.shape[0]
    dim = b.size
    e_first = float(ndtr(b[0] / chol[0, 0]))
    prod = np.full(npts, e_first)
    e_prev = prod.copy()
    y = np.empty((npts, dim - 1))
    for i in range(1, dim):
        y[:, i - 1] = ndtri(np.clip(u[:, i - 1] * e_prev, _UEPS, _UTOP))
        acc = np.zeros(npts)
        for j in range(i):
            acc += chol[i, j] * y[:, j]
        e_i = ndtr((b[i] - acc) / chol[i, i])
        prod *= e_i
        e_prev = e_i
    return prod


def mvn_cdf(
    upper,
    corr: CorrelationMatrix,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> MvnResult:
    """P(Z_1 <= b_1, ..., Z_N <= b_N) for Z ~ N(0, R).

    ``upper`` entries may be +/-inf: -inf collapses the probability to 0
    and +inf coordinates integrate out exactly.  Coordinates are sorted
    by increasing limit before factorization (standard variance
    reduction); the returned value does not depend on the input order.
    Identical (inputs, seed) produce bit-identical results.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    b = np.asarray(upper, dtype=float)
    if b.ndim != 1 or b.size != corr.dim:
        raise ValueError(f"upper must be a length-{corr.dim} vector")
    if np.any(np.isnan(b)):
        raise ValueError("upper limits must not be NaN")

    if np.any(b == -np.inf):
        return MvnResult(0.0, 0.0, 0)
    keep = np.flatnonzero(b < np.inf)
    if keep.size == 0:
        return MvnResult(1.0, 0.0, 0)
    if keep.size == 1:
        return MvnResult(float(ndtr(b[keep[0]])), 0.0, 0)

    order = keep[np.argsort(b[keep], kind="stable")]
    b_s = b[order]
    r_s = corr.entries[np.ix_(order, order)]
    if keep.size == corr.dim and np.array_equal(order, np.arange(corr.dim)):
        chol = corr.chol
    else:
        chol = _cholesky_lower(r_s)
        if chol is None:
            chol = _cholesky_lower(r_s + 1e-12 * np.eye(r_s.shape[0]))
        if chol is None:
            raise NumericsError("correlation submatrix not factorizable")

    dim = b_s.size
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    shifts = gen.random((_NUM_SHIFTS, dim - 1))
    lattice = np.sqrt(_primes(dim - 1).astype(float)) % 1.0

    points_used = 0
    n = _FIRST_LEVEL
    value = 0.0
    err = math.inf
    converged = False
    while True:
        idx = np.arange(1, n + 1, dtype=float)[:, None] * lattice[None, :]
        u = np.abs(2.0 * ((idx[None, :, :] + shifts[:, None, :]) % 1.0) - 1.0)
        prods = _genz_products(chol, b_s, u.reshape(_NUM_SHIFTS * n, dim - 1))
        per_shift = prods.reshape(_NUM_SHIFTS, n).mean(axis=1)
        points_used += _NUM_SHIFTS * n
        value = float(per_shift.mean())
        err = 3.0 * float(per_shift.std(ddof=1)) / math.sqrt(_NUM_SHIFTS)
        if err <= tol:
            converged = True
            break
        if points_used + 2 * _NUM_SHIFTS * n > POINT_BUDGET:
            break
        n *= 2
    return MvnResult(value, err, points_used, converged)


def mvn_cdf_equicoordinate(
    b: float,
    corr: CorrelationMatrix,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> MvnResult:
    """mvn_cdf with every coordinate set to the same limit ``b``."""
    return mvn_cdf(np.full(corr.dim, float(b)), corr, tol=tol, seed=seed)
