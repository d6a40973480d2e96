"""Port grid geometry and the spatial correlation matrix of a fluid antenna.

Ports live on an n1 x n2 grid spanning an aperture of w1 x w2 carrier
wavelengths.  The correlation between two ports is the zeroth-order
spherical Bessel function of 2*pi times their separation in wavelengths
(isotropic rich scattering).  Dense grids produce matrices that are
numerically indefinite, so construction optionally repairs the spectrum
by clamping eigenvalues and renormalizing the diagonal, and always ends
with a Cholesky factor usable for Gaussian-copula sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import NumericsError, _j0_array, spherical_bessel_j0

__all__ = [
    "CorrelationMatrix",
    "PortGrid",
    "build_correlation",
    "correlation_from_entries",
    "port_correlation",
    "port_positions",
    "port_to_grid",
]

# eigenvalue clamp used by the PSD repair
EIGEN_FLOOR = 1e-6
# matrices with min eigenvalue above this are accepted as-is
_PSD_TOL = -1e-10


@dataclass(frozen=True)
class PortGrid:
    """Fluid-antenna port layout: n1 x n2 ports over w1 x w2 wavelengths.

    A dimension with a single port has no extent; its aperture length may
    be zero and it contributes nothing to port separations.
    """

    n1: int
    n2: int
    w1: float
    w2: float

    def __post_init__(self) -> None:
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("port counts must be >= 1")
        if self.n1 > 1 and self.w1 <= 0.0:
            raise ValueError("w1 must be > 0 when n1 > 1 (coincident ports)")
        if self.n2 > 1 and self.w2 <= 0.0:
            raise ValueError("w2 must be > 0 when n2 > 1 (coincident ports)")
        if self.w1 < 0.0 or self.w2 < 0.0:
            raise ValueError("aperture lengths must be nonnegative")

    @property
    def count(self) -> int:
        return self.n1 * self.n2


def port_to_grid(n: int, grid: PortGrid) -> tuple[int, int]:
    """Map the 1-based linear port index to 1-based (n1, n2) grid indices.

    Row-major: n = (n2 - 1) * grid.n1 + n1.
    """
    if not 1 <= n <= grid.count:
        raise IndexError(f"port index {n} outside 1..{grid.count}")
    return ((n - 1) % grid.n1 + 1, (n - 1) // grid.n1 + 1)


def port_positions(grid: PortGrid) -> np.ndarray:
    """(N, 2) port coordinates in wavelengths, row-major port order."""
    i1 = np.arange(grid.n1)
    i2 = np.arange(grid.n2)
    x = i1 / (grid.n1 - 1) * grid.w1 if grid.n1 > 1 else np.zeros(1)
    y = i2 / (grid.n2 - 1) * grid.w2 if grid.n2 > 1 else np.zeros(1)
    xx, yy = np.meshgrid(x, y)  # rows vary in n2, columns in n1
    return np.column_stack([xx.ravel(), yy.ravel()])


def port_correlation(n: int, m: int, grid: PortGrid) -> float:
    """Correlation of gains at ports n and m: j0(2*pi*separation)."""
    p1, p2 = port_to_grid(n, grid), port_to_grid(m, grid)
    dx = (p1[0] - p2[0]) / (grid.n1 - 1) * grid.w1 if grid.n1 > 1 else 0.0
    dy = (p1[1] - p2[1]) / (grid.n2 - 1) * grid.w2 if grid.n2 > 1 else 0.0
    return spherical_bessel_j0(2.0 * math.pi * math.hypot(dx, dy))


@dataclass
class CorrelationMatrix:
    """Symmetric unit-diagonal port correlation matrix with its factor.

    ``repaired`` records whether the eigenvalue clamp ran; ``eigen_floor``
    is the clamp applied (0 when untouched).  ``chol`` is the lower
    Cholesky factor of ``entries``.  Treat instances as immutable.
    """

    dim: int
    entries: np.ndarray
    repaired: bool
    eigen_floor: float
    chol: np.ndarray


def _cholesky_lower(a: np.ndarray) -> np.ndarray | None:
    """Plain lower Cholesky; None when a pivot is not strictly positive.

    Hand-rolled so factorization stays bit-reproducible regardless of
    BLAS threading.
    """
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - float(np.dot(low[j, :j], low[j, :j]))
        if d <= 0.0:
            return None
        low[j, j] = math.sqrt(d)
        if j + 1 < n:
            low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def _repair(entries: np.ndarray) -> np.ndarray:
    """Clamp eigenvalues at EIGEN_FLOOR then renormalize the diagonal."""
    vals, vecs = np.linalg.eigh(entries)
    clipped = np.maximum(vals, EIGEN_FLOOR)
    m = (vecs * clipped) @ vecs.T
    d = np.sqrt(np.diag(m))
    m = m / np.outer(d, d)
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 1.0)
    return m


def correlation_from_entries(entries: np.ndarray) -> CorrelationMatrix:
    """Validate, repair if needed, and factor a correlation matrix.

    Repair triggers when the minimum eigenvalue falls below -1e-10 or
    when the Cholesky factorization fails outright (exactly singular
    input such as a comonotone block).  Raises NumericsError when even
    the repaired matrix cannot be factored.
    """
    m = np.array(entries, dtype=float, copy=True)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("correlation entries must be a square matrix")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-14):
        raise ValueError("correlation entries must be symmetric")
    if not np.allclose(np.diag(m), 1.0, rtol=0.0, atol=1e-12):
        raise ValueError("correlation entries must have a unit diagonal")
    m = 0.5 * (m + m.T)

    repaired = False
    floor = 0.0
    if float(np.linalg.eigvalsh(m).min()) < _PSD_TOL:
        m = _repair(m)
        repaired, floor = True, EIGEN_FLOOR
    chol = _cholesky_lower(m)
    if chol is None and not repaired:
        m = _repair(m)
        repaired, floor = True, EIGEN_FLOOR
        chol = _cholesky_lower(m)
    if chol is None:
        raise NumericsError("correlation matrix not factorizable after repair")
    return CorrelationMatrix(
        dim=m.shape[0], entries=m, repaired=repaired, eigen_floor=floor, chol=chol
    )


def build_correlation(grid: PortGrid) -> CorrelationMatrix:
    """Correlation matrix of all port pairs of ``grid``, repaired/factored."""
    pos = port_positions(grid)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    entries = _j0_array(2.0 * math.pi * dist)
    np.fill_diagonal(entries, 1.0)
    return correlation_from_entries(entries)
