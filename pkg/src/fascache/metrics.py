"""Delivery metrics: per-content success probability, SCDP, and delay.

The per-content success probability is

    P_s = int_0^inf 2*pi*q*mu*x*exp(-pi*q*mu*x^2)
          * [1 - F_best(eta*sigma^2*x^alpha / (P*beta))] dx,

the chance that the best-port SNR from the nearest caching SBS clears
the threshold.  Two routes evaluate it:

* ``success_probability`` applies the Gauss-Laguerre rule, placing the
  survival factor at the nodes with the q*mu*k^2*exp(-pi*q*mu*k^2)
  node profile.  The density's full 2*pi*q*mu coefficient must survive
  the substitution (halving it makes the estimator converge to half the
  probability; the zero-threshold limit sum w*e^k*f(k) = 1 pins it) and
  the adaptive cross-check below guards the node placement.
* ``success_probability_adaptive`` integrates the same expression with
  adaptive Gauss-Kronrod on a truncated interval and serves as the
  independent oracle for the quadrature path.

SCDP weights the per-content values by popularity; the delay formulas
are the truncated-geometric ARQ forms T0*(1-(1-P)^M)/P and T0/P.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .channel import FasChannel, fas_gain_result
from .network import CachePolicy, ContentCatalog, NetworkParams
from .specfun import QuadratureRule

__all__ = [
    "CrossCheckWarning",
    "SuccessResult",
    "cdd",
    "cdd_asymptotic",
    "cdd_weighted",
    "cross_check_tolerance",
    "scdp",
    "scdp_adaptive",
    "success_probability",
    "success_probability_adaptive",
]

# GL-vs-adaptive agreement threshold (absolute), before MVN error widening
CROSS_CHECK_ATOL = 2e-3
# success probabilities below this are treated as zero (infinite delay)
_P_FLOOR = 1e-12
# truncation for the adaptive path: HPPP tail mass below 1e-12
_TAIL_LOG = math.log(1e12)


class CrossCheckWarning(UserWarning):
    """Quadrature path and adaptive oracle disagree beyond tolerance."""


@dataclass(frozen=True)
class SuccessResult:
    """Per-content success probability and how it was computed."""

    value: float
    method: str  # "gauss_laguerre" | "adaptive"
    quad_order: int | None
    mvn_tol: float
    mvn_error: float = 0.0


def cross_check_tolerance(mvn_error: float) -> float:
    return max(CROSS_CHECK_ATOL, 3.0 * mvn_error)


def _snr_gain_threshold(params: NetworkParams, x: float) -> float:
    """Gain level the best port must exceed at distance x."""
    return (
        params.snr_threshold
        * params.noise_power
        * x**params.pathloss_exp
        / (params.tx_power * params.pathloss_const)
    )


def _survival(ch: FasChannel, params: NetworkParams, x: float) -> tuple[float, float]:
    """(P(best gain >= threshold at distance x), MVN error estimate)."""
    res = fas_gain_result(ch, _snr_gain_threshold(params, x))
    return 1.0 - res.value, res.error_estimate


def success_probability(
    l: int,
    params: NetworkParams,
    policy: CachePolicy,
    ch: FasChannel,
    rule: QuadratureRule,
    cross_check: bool = False,
) -> SuccessResult:
    """Success probability of content ``l`` via the Gauss-Laguerre rule.

    Uncached content (q_l = 0) succeeds with probability 0.  With
    ``cross_check`` the adaptive oracle runs too and a
    CrossCheckWarning is emitted if the two routes disagree beyond
    ``cross_check_tolerance``.
    """
    q = float(policy.probs[l - 1])
    if q <= 0.0:
        return SuccessResult(0.0, "gauss_laguerre", rule.order, ch.mvn_tol)

    t = math.pi * q * params.sbs_intensity
    log_w = np.log(rule.weights)
    total = 0.0
    err_total = 0.0
    for k, lw in zip(rule.nodes, log_w):
        surv, err = _survival(ch, params, k)
        # plain-integral weight w*e^k times 2*t*k*exp(-t*k^2), combined in
        # log space so large nodes cannot overflow
        factor = math.exp(lw + k - t * k * k)
        total += factor * 2.0 * t * k * surv
        err_total += factor * 2.0 * t * k * err
    value = min(max(total, 0.0), 1.0)
    result = SuccessResult(value, "gauss_laguerre", rule.order, ch.mvn_tol, err_total)

    if cross_check:
        oracle = success_probability_adaptive(l, params, policy, ch)
        gap = abs(result.value - oracle.value)
        tol = cross_check_tolerance(max(result.mvn_error, oracle.mvn_error))
        if gap > tol:
            warnings.warn(
                f"quadrature path {result.value:.6f} vs adaptive oracle "
                f"{oracle.value:.6f} for content {l}: |diff| = {gap:.2e} > {tol:.2e}",
                CrossCheckWarning,
                stacklevel=2,
            )
    return result


def success_probability_adaptive(
    l: int,
    params: NetworkParams,
    policy: CachePolicy,
    ch: FasChannel,
    epsabs: float | None = None,
) -> SuccessResult:
    """Same integral by adaptive Gauss-Kronrod; the oracle route.

    The half-line is truncated where the remaining distance-distribution
    mass drops below 1e-12.  With a single port the integrand is exact,
    so tight tolerances apply; otherwise the absolute tolerance follows
    the MVN tolerance since the integrand itself carries that noise.
    """
    q = float(policy.probs[l - 1])
    if q <= 0.0:
        return SuccessResult(0.0, "adaptive", None, ch.mvn_tol)

    t = math.pi * q * params.sbs_intensity
    x_max = math.sqrt(_TAIL_LOG / t)
    if epsabs is None:
        epsabs = 1e-10 if ch.corr.dim == 1 else max(1e-6, 0.1 * ch.mvn_tol)
    worst_err = 0.0

    def integrand(x: float) -> float:
        nonlocal worst_err
        surv, err = _survival(ch, params, x)
        worst_err = max(worst_err, err)
        return 2.0 * t * x * math.exp(-t * x * x) * surv

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(integrand, 0.0, x_max, epsabs=epsabs, epsrel=epsabs, limit=200)
    return SuccessResult(min(max(value, 0.0), 1.0), "adaptive", None, ch.mvn_tol, worst_err)


def scdp(
    params: NetworkParams,
    catalog: ContentCatalog,
    policy: CachePolicy,
    ch: FasChannel,
    rule: QuadratureRule,
) -> float:
    """Popularity-weighted successful-content-delivery probability.

    The channel memoizes the per-node CDF values, which depend on the
    node levels only, so the catalog loop costs one set of MVN
    evaluations regardless of content count.
    """
    if catalog.count != policy.probs.size:
        raise ValueError("catalog and policy sizes differ")
    total = 0.0
    for l in range(1, catalog.count + 1):
        p = float(catalog.popularity[l - 1])
        if p == 0.0:
            continue
        total += p * success_probability(l, params, policy, ch, rule).value
    return min(max(total, 0.0), 1.0)


def scdp_adaptive(
    params: NetworkParams,
    catalog: ContentCatalog,
    policy: CachePolicy,
    ch: FasChannel,
) -> float:
    """SCDP with every per-content term from the adaptive oracle route.

    Contents sharing the same caching probability share the same success
    probability, so the integral runs once per distinct q value.
    """
    if catalog.count != policy.probs.size:
        raise ValueError("catalog and policy sizes differ")
    per_q: dict[float, float] = {}
    total = 0.0
    for l in range(1, catalog.count + 1):
        p = float(catalog.popularity[l - 1])
        if p == 0.0:
            continue
        q = float(policy.probs[l - 1])
        if q not in per_q:
            per_q[q] = success_probability_adaptive(l, params, policy, ch).value
        total += p * per_q[q]
    return min(max(total, 0.0), 1.0)


def _delay_from_success(p_success: float, params: NetworkParams) -> float:
    if p_success < _P_FLOOR:
        return math.inf
    if params.max_arq == 1:
        # algebraic identity (1-(1-P))/P = 1; bypass roundoff
        return params.slot_time
    return params.slot_time * -math.expm1(params.max_arq * math.log1p(-p_success)) / p_success


def cdd(
    l: int,
    params: NetworkParams,
    policy: CachePolicy,
    ch: FasChannel,
    rule: QuadratureRule,
) -> float:
    """Expected delivery delay of content ``l`` in seconds.

    T0 * (1 - (1 - P_s)^M) / P_s, inf when the content is effectively
    never delivered (uncached or vanishing success probability).
    """
    if float(policy.probs[l - 1]) <= 0.0:
        return math.inf
    p = success_probability(l, params, policy, ch, rule).value
    return _delay_from_success(p, params)


def cdd_asymptotic(
    l: int,
    params: NetworkParams,
    policy: CachePolicy,
    ch: FasChannel,
    rule: QuadratureRule,
) -> float:
    """Large-M delay limit T0 / P_s (seconds); inf for uncached content."""
    if float(policy.probs[l - 1]) <= 0.0:
        return math.inf
    p = success_probability(l, params, policy, ch, rule).value
    if p < _P_FLOOR:
        return math.inf
    return params.slot_time / p


def cdd_weighted(
    params: NetworkParams,
    catalog: ContentCatalog,
    policy: CachePolicy,
    ch: FasChannel,
    rule: QuadratureRule,
) -> float:
    """Popularity-weighted delay over the catalog.

    Infinite as soon as any requested content is uncached, since that
    content alone never arrives.
    """
    if catalog.count != policy.probs.size:
        raise ValueError("catalog and policy sizes differ")
    total = 0.0
    for l in range(1, catalog.count + 1):
        p = float(catalog.popularity[l - 1])
        if p == 0.0:
            continue
        d = cdd(l, params, policy, ch, rule)
        if math.isinf(d):
            return math.inf
        total += p * d
    return total
