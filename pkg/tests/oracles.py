"""Independent oracles used by the test suite.

Everything here deliberately avoids the package's own code paths:
closed forms, scipy special functions, brute-force quadrature of
densities, and root-finding against reference implementations.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize
from scipy.special import ndtr
from scipy.stats import norm


def bvn_cdf(b1: float, b2: float, rho: float) -> float:
    """Bivariate normal CDF by Plackett's identity (single 1-D quadrature).

    Phi2(b1, b2; rho) = Phi(b1) Phi(b2) + int_0^rho phi2(b1, b2; r) dr
    """

    def density(r: float) -> float:
        det = 1.0 - r * r
        expo = -(b1 * b1 - 2.0 * r * b1 * b2 + b2 * b2) / (2.0 * det)
        return math.exp(expo) / (2.0 * math.pi * math.sqrt(det))

    tail, _ = integrate.quad(density, 0.0, rho, epsabs=1e-12, epsrel=1e-12)
    return float(ndtr(b1) * ndtr(b2) + tail)


def tvn_cdf(b: np.ndarray, corr: np.ndarray) -> float:
    """Trivariate normal CDF by conditioning on the third coordinate.

    Given Z3 = z, (Z1, Z2) is bivariate normal with means rho_i3 * z and
    conditional correlation (rho12 - rho13 rho23) / sqrt(...).
    """
    r12, r13, r23 = corr[0, 1], corr[0, 2], corr[1, 2]
    s1 = math.sqrt(1.0 - r13 * r13)
    s2 = math.sqrt(1.0 - r23 * r23)
    rc = (r12 - r13 * r23) / (s1 * s2)

    def integrand(z: float) -> float:
        return norm.pdf(z) * bvn_cdf((b[0] - r13 * z) / s1, (b[1] - r23 * z) / s2, rc)

    lo = min(-8.5, b[2] - 1.0)
    val, _ = integrate.quad(integrand, lo, b[2], epsabs=1e-10, epsrel=1e-10, limit=200)
    return float(val)


def erf_inverse_by_root(p: float) -> float:
    """Invert scipy's erf by bracketed root-finding (Newton-free oracle)."""
    from scipy.special import erf as sp_erf

    return float(optimize.brentq(lambda x: sp_erf(x) - p, -10.0, 10.0, xtol=1e-15))


def normal_quantile_by_bisection(u: float) -> float:
    """Invert scipy's normal CDF by bisection."""
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ndtr(mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def closed_form_success_alpha2(q: float, mu: float, eta: float, sigma2: float,
                               power: float, beta: float) -> float:
    """P_s for a single port and pathloss exponent 2 (Gaussian integral)."""
    t = math.pi * q * mu
    return t / (t + eta * sigma2 / (power * beta))


def nearest_distance_cdf(x, q: float, mu: float):
    """CDF matching the thinned-HPPP nearest-distance density."""
    return 1.0 - np.exp(-math.pi * q * mu * np.asarray(x) ** 2)


def truncated_geometric_delay(p: float, m: int, t0: float) -> float:
    """Expected delay of at most m i.i.d. Bernoulli(p) rounds of length t0."""
    return t0 * sum((1.0 - p) ** k for k in range(m))
