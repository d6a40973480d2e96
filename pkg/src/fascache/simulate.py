"""Monte-Carlo oracle: end-to-end sampling of requests, geometry and ARQ.

Each trial draws a content by popularity, the distance to the nearest
SBS caching it, and up to M rounds of correlated best-port fading; a
round succeeds when the received SNR clears the threshold.  By default
both fading and distance are redrawn every round, which makes the round
outcomes i.i.d. and the delay exactly truncated-geometric, matching the
analytic delay formula; ``redraw_distance=False`` keeps the first
distance for the whole trial (physically plausible for a static user,
but it deviates from the analytic model and is off by default).

Reproducibility: trials are processed in fixed-size chunks, each chunk
and round drawing from its own counter-based Philox substream keyed by
(seed, chunk, round).  Partial sums reduce in chunk order with
compensated summation, so results are bit-identical regardless of how
chunks would be scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import FasChannel, make_channel, sample_fas_gains
from .correlation import PortGrid
from .network import CachePolicy, ContentCatalog, NetworkParams, db_to_linear, policy_scalar

__all__ = ["SimConfig", "SimResult", "simulate", "simulate_sweep"]

_CHUNK = 1 << 16
_SWEEP_AXES = ("eta_db", "mu_s", "q_scalar", "M", "N", "W")


@dataclass(frozen=True)
class SimConfig:
    """Inputs of one simulation run."""

    trials: int
    seed: int
    params: NetworkParams
    catalog: ContentCatalog
    policy: CachePolicy
    grid: PortGrid
    redraw_distance: bool = True

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.catalog.count != self.policy.probs.size:
            raise ValueError("catalog and policy sizes differ")


@dataclass(frozen=True, eq=False)
class SimResult:
    """Empirical SCDP and delay with 95% confidence half-widths.

    ``cdd_hat`` counts timed-out requests at M*T0 (the unconditional
    mean, the quantity the analytic delay formula computes);
    ``cdd_cond_hat`` conditions on delivery within M rounds.
    ``round_success_rate`` pools every drawn round outcome and estimates
    the per-round success probability.
    """

    scdp_hat: float
    scdp_ci95: float
    cdd_hat: float
    cdd_ci95: float
    cdd_cond_hat: float
    round_success_rate: float
    per_content: np.ndarray | None
    trials_run: int


def _stream(seed: int, chunk: int, slot: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chunk, slot))
    return np.random.Generator(np.random.Philox(ss))


def simulate(cfg: SimConfig, channel: FasChannel | None = None) -> SimResult:
    """Run the Monte-Carlo oracle; deterministic for a fixed config.

    A prebuilt ``channel`` for cfg.grid may be passed to reuse its
    correlation factor; only the Cholesky factor is consumed.
    """
    if channel is None:
        channel = make_channel(cfg.grid)
    elif channel.grid != cfg.grid:
        raise ValueError("channel was built for a different port grid")
    params = cfg.params
    m_rounds = params.max_arq
    gain_coeff = params.snr_threshold * params.noise_power / (
        params.tx_power * params.pathloss_const
    )
    cum_pop = np.cumsum(cfg.catalog.popularity)
    count = cfg.catalog.count

    n_chunks = (cfg.trials + _CHUNK - 1) // _CHUNK
    scdp_parts: list[float] = []
    rounds_parts: list[float] = []
    rounds_sq_parts: list[float] = []
    delivered_parts: list[float] = []
    cond_rounds_parts: list[float] = []
    round_succ_parts: list[float] = []
    per_content_succ = np.zeros(count)
    per_content_seen = np.zeros(count)

    for chunk in range(n_chunks):
        nloc = min(_CHUNK, cfg.trials - chunk * _CHUNK)
        u = _stream(cfg.seed, chunk, 0).random(nloc)
        l_idx = np.minimum(np.searchsorted(cum_pop, u, side="right"), count - 1)
        lam = math.pi * cfg.policy.probs[l_idx] * params.sbs_intensity

        succeeded = np.zeros(nloc, dtype=bool)
        rounds_used = np.full(nloc, m_rounds, dtype=np.int64)
        first_round_ok = np.zeros(nloc, dtype=bool)
        round_successes = 0.0
        x_first: np.ndarray | None = None

        for m in range(m_rounds):
            gen = _stream(cfg.seed, chunk, 1 + m)
            # inverse-CDF distance draw, vectorized over per-trial thinned
            # intensities; lam = 0 (uncached) yields an infinite distance
            # and the round fails naturally
            u_dist = gen.random(nloc)
            with np.errstate(divide="ignore"):
                x = np.sqrt(-np.log1p(-u_dist) / lam)
            if not cfg.redraw_distance:
                if m == 0:
                    x_first = x
                else:
                    x = x_first
            best, _ = sample_fas_gains(channel, gen, nloc)
            with np.errstate(over="ignore"):
                ok = best >= gain_coeff * x**params.pathloss_exp
            round_successes += float(ok.sum())
            newly = ok & ~succeeded
            rounds_used[newly] = m + 1
            succeeded |= ok
            if m == 0:
                first_round_ok = ok

        scdp_parts.append(float(first_round_ok.sum()))
        rounds_parts.append(float(rounds_used.sum()))
        rounds_sq_parts.append(float((rounds_used.astype(float) ** 2).sum()))
        delivered_parts.append(float(succeeded.sum()))
        cond_rounds_parts.append(float(rounds_used[succeeded].sum()))
        round_succ_parts.append(round_successes)
        per_content_succ += np.bincount(l_idx, weights=first_round_ok.astype(float), minlength=count)
        per_content_seen += np.bincount(l_idx, minlength=count)

    n = float(cfg.trials)
    t0 = params.slot_time
    scdp_hat = math.fsum(scdp_parts) / n
    scdp_ci95 = 1.96 * math.sqrt(max(scdp_hat * (1.0 - scdp_hat), 0.0) / n)

    rounds_mean = math.fsum(rounds_parts) / n
    rounds_var = max(math.fsum(rounds_sq_parts) / n - rounds_mean**2, 0.0)
    cdd_hat = t0 * rounds_mean
    cdd_ci95 = 1.96 * t0 * math.sqrt(rounds_var / n)

    delivered = math.fsum(delivered_parts)
    cdd_cond_hat = t0 * math.fsum(cond_rounds_parts) / delivered if delivered > 0 else math.inf
    round_rate = math.fsum(round_succ_parts) / (n * m_rounds)

    with np.errstate(invalid="ignore"):
        per_content = np.where(per_content_seen > 0, per_content_succ / per_content_seen, np.nan)

    return SimResult(
        scdp_hat=scdp_hat,
        scdp_ci95=scdp_ci95,
        cdd_hat=cdd_hat,
        cdd_ci95=cdd_ci95,
        cdd_cond_hat=cdd_cond_hat,
        round_success_rate=round_rate,
        per_content=per_content,
        trials_run=cfg.trials,
    )


def _apply_axis(cfg: SimConfig, axis: str, value) -> SimConfig:
    if axis == "eta_db":
        return replace(cfg, params=replace(cfg.params, snr_threshold=db_to_linear(float(value))))
    if axis == "mu_s":
        return replace(cfg, params=replace(cfg.params, sbs_intensity=float(value)))
    if axis == "q_scalar":
        return replace(cfg, policy=policy_scalar(cfg.catalog.count, float(value)))
    if axis == "M":
        return replace(cfg, params=replace(cfg.params, max_arq=int(value)))
    if axis == "N":
        side = math.isqrt(int(value))
        if side * side != int(value):
            raise ValueError(f"N sweep values must be perfect squares, got {value}")
        return replace(cfg, grid=replace(cfg.grid, n1=side, n2=side))
    if axis == "W":
        return replace(cfg, grid=replace(cfg.grid, w1=float(value), w2=float(value)))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {_SWEEP_AXES}")


def simulate_sweep(cfg: SimConfig, axis: str, values) -> list[SimResult]:
    """One simulation per axis value, each on its own derived seed."""
    if axis not in _SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {_SWEEP_AXES}")
    results = []
    axis_id = _SWEEP_AXES.index(axis)
    for i, value in enumerate(values):
        ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(axis_id, i))
        child_seed = int(ss.generate_state(1, np.uint64)[0])
        results.append(simulate(replace(_apply_axis(cfg, axis, value), seed=child_seed)))
    return results
