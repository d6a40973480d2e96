"""Content popularity, cache policies, and nearest-SBS distance law.

All analytic quantities are in SI/linear units (watts, meters, linear
SNR); dB and dBm conversions belong at the configuration boundary only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CachePolicy",
    "ContentCatalog",
    "NetworkParams",
    "db_to_linear",
    "dbm_to_watts",
    "nearest_distance_pdf",
    "policy_scalar",
    "policy_top_k",
    "policy_uniform",
    "sample_nearest_distance",
    "zipf_popularity",
]


@dataclass(frozen=True)
class ContentCatalog:
    """Zipf-ranked content library of ``count`` items."""

    count: int
    zipf_exp: float
    popularity: np.ndarray

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("catalog must contain at least one content")
        if self.zipf_exp < 0.0:
            raise ValueError("Zipf exponent must be nonnegative")
        if self.popularity.shape != (self.count,):
            raise ValueError("popularity vector length must equal count")


def zipf_popularity(count: int, zipf_exp: float) -> ContentCatalog:
    """Request probabilities p_l = l^-zeta / sum_k k^-zeta, most popular first."""
    ranks = np.arange(1, count + 1, dtype=float)
    raw = ranks**-float(zipf_exp)
    return ContentCatalog(count=count, zipf_exp=float(zipf_exp), popularity=raw / raw.sum())


@dataclass(frozen=True)
class CachePolicy:
    """Per-content caching probabilities under a capacity budget.

    ``probs[l-1]`` is the probability that content l is stored at an
    SBS; the expected cache occupancy sum(probs) must fit ``capacity``.
    """

    probs: np.ndarray
    capacity: int

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("cache capacity must be >= 1")
        p = self.probs
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("caching probabilities must lie in [0, 1]")
        if float(p.sum()) > self.capacity + 1e-9:
            raise ValueError(
                f"caching probabilities sum to {p.sum():.6g}, exceeding capacity {self.capacity}"
            )


def policy_top_k(count: int, capacity: int) -> CachePolicy:
    """Deterministically cache the ``capacity`` most popular contents."""
    if capacity > count:
        raise ValueError("capacity must not exceed the catalog size")
    q = np.zeros(count)
    q[:capacity] = 1.0
    return CachePolicy(probs=q, capacity=capacity)


def policy_uniform(count: int, capacity: int) -> CachePolicy:
    """Cache every content independently with probability capacity/count."""
    if capacity > count:
        raise ValueError("capacity must not exceed the catalog size")
    return CachePolicy(probs=np.full(count, capacity / count), capacity=capacity)


def policy_scalar(count: int, q: float) -> CachePolicy:
    """Every content cached with the same probability ``q`` (figure knob).

    Capacity is set to the catalog size so the occupancy constraint holds
    for the whole q range; this models the per-content caching
    probability as a free parameter.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    return CachePolicy(probs=np.full(count, q), capacity=count)


@dataclass(frozen=True)
class NetworkParams:
    """Physical-layer and protocol parameters, strictly SI/linear.

    sbs_intensity  SBS density [1/m^2]
    tx_power       transmit power [W]
    noise_power    noise (plus weak interference) power [W]
    pathloss_exp   pathloss exponent alpha
    pathloss_const frequency-dependent pathloss constant beta
    snr_threshold  linear SNR threshold
    slot_time      duration of one ARQ round [s]
    max_arq        maximum number of ARQ rounds
    """

    sbs_intensity: float
    tx_power: float
    noise_power: float
    pathloss_exp: float
    pathloss_const: float
    snr_threshold: float
    slot_time: float
    max_arq: int

    def __post_init__(self) -> None:
        positives = {
            "sbs_intensity": self.sbs_intensity,
            "tx_power": self.tx_power,
            "noise_power": self.noise_power,
            "pathloss_exp": self.pathloss_exp,
            "pathloss_const": self.pathloss_const,
            "snr_threshold": self.snr_threshold,
            "slot_time": self.slot_time,
        }
        for name, value in positives.items():
            if not value > 0.0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.max_arq < 1:
            raise ValueError("max_arq must be >= 1")


def nearest_distance_pdf(x: float, q: float, sbs_intensity: float) -> float:
    """Density of the distance to the nearest SBS caching the content.

    The caching SBSs form a thinned Poisson process of intensity
    q * sbs_intensity, whose nearest-point distance has density
    2*pi*q*mu*x*exp(-pi*q*mu*x^2).
    """
    lam = q * sbs_intensity
    if lam <= 0.0:
        raise ValueError("content uncached: q * sbs_intensity must be positive")
    if x < 0.0:
        raise ValueError("distance must be nonnegative")
    return 2.0 * math.pi * lam * x * math.exp(-math.pi * lam * x * x)


def sample_nearest_distance(
    q: float, sbs_intensity: float, stream: np.random.Generator, size: int | None = None
):
    """Draw nearest caching-SBS distances by CDF inversion."""
    lam = q * sbs_intensity
    if lam <= 0.0:
        raise ValueError("content uncached: q * sbs_intensity must be positive")
    u = stream.random(size)
    return np.sqrt(-np.log1p(-u) / (math.pi * lam))


def dbm_to_watts(x_dbm: float) -> float:
    """Power in watts from dBm."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    """Dimensionless ratio from dB."""
    return 10.0 ** (x_db / 10.0)
