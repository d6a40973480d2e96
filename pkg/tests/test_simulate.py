import math

import numpy as np
import pytest

from fascache.channel import make_channel
from fascache.correlation import PortGrid
from fascache.metrics import success_probability
from fascache.network import (
    NetworkParams,
    db_to_linear,
    dbm_to_watts,
    policy_scalar,
    policy_top_k,
    zipf_popularity,
)
from fascache.simulate import SimConfig, simulate, simulate_sweep
from fascache.specfun import gauss_laguerre_rule

from oracles import closed_form_success_alpha2, truncated_geometric_delay

RULE30 = gauss_laguerre_rule(30)
GRID9 = PortGrid(3, 3, 1.0, 1.0)
GRID1 = PortGrid(1, 1, 0.0, 0.0)


def make_params(eta_db=0.0, mu=1e-2, alpha=3.0, arq=3):
    return NetworkParams(
        sbs_intensity=mu,
        tx_power=dbm_to_watts(-30.0),
        noise_power=dbm_to_watts(-60.0),
        pathloss_exp=alpha,
        pathloss_const=1.0,
        snr_threshold=db_to_linear(eta_db),
        slot_time=1e-3,
        max_arq=arq,
    )


def single_content_cfg(trials=100_000, seed=5, grid=GRID9, **kwargs):
    return SimConfig(
        trials=trials,
        seed=seed,
        params=make_params(**kwargs),
        catalog=zipf_popularity(1, 0.0),
        policy=policy_scalar(1, 1.0),
        grid=grid,
    )


class TestSimulate:
    def test_vanishing_threshold_always_succeeds(self):
        params = NetworkParams(
            sbs_intensity=1e-2, tx_power=1e-6, noise_power=1e-9, pathloss_exp=3.0,
            pathloss_const=1.0, snr_threshold=1e-9, slot_time=1e-3, max_arq=3,
        )
        cfg = SimConfig(trials=50_000, seed=3, params=params,
                        catalog=zipf_popularity(1, 0.0), policy=policy_scalar(1, 1.0),
                        grid=GRID1)
        res = simulate(cfg)
        assert res.scdp_hat == 1.0
        assert res.cdd_hat == params.slot_time
        assert res.trials_run == 50_000

    def test_single_port_closed_form(self):
        params = make_params(eta_db=0.0, alpha=2.0)
        exact = closed_form_success_alpha2(
            1.0, params.sbs_intensity, params.snr_threshold, params.noise_power,
            params.tx_power, params.pathloss_const,
        )
        cfg = SimConfig(trials=1_000_000, seed=41, params=params,
                        catalog=zipf_popularity(1, 0.0), policy=policy_scalar(1, 1.0),
                        grid=GRID1)
        res = simulate(cfg)
        sigma = math.sqrt(exact * (1.0 - exact) / cfg.trials)
        assert abs(res.scdp_hat - exact) <= 3.0 * sigma

    def test_matches_analytic_on_defaults(self):
        channel = make_channel(GRID9, seed=9)
        params = make_params(eta_db=10.0)
        analytic = success_probability(1, params, policy_scalar(1, 1.0), channel, RULE30).value
        cfg = single_content_cfg(trials=200_000, seed=12, eta_db=10.0)
        res = simulate(cfg, channel=channel)
        sigma = math.sqrt(analytic * (1.0 - analytic) / cfg.trials)
        assert abs(res.scdp_hat - analytic) <= max(3.0 * sigma, 0.005)
        # unconditional delay against the truncated-geometric delay formula
        expected_delay = truncated_geometric_delay(analytic, params.max_arq, params.slot_time)
        assert res.cdd_hat == pytest.approx(expected_delay, rel=0.02)
        assert res.cdd_cond_hat <= res.cdd_hat + 1e-12
        # per-round rate pools trials*M i.i.d. rounds
        sigma_round = math.sqrt(analytic * (1.0 - analytic) / (cfg.trials * params.max_arq))
        assert abs(res.round_success_rate - analytic) <= 3.0 * sigma_round

    def test_conditional_delay_matches_formula_at_defaults(self):
        # at the default operating point (eta = 0 dB) nearly every trial
        # delivers, so the delivery-conditioned mean matches the
        # truncated-geometric delay within 2%
        channel = make_channel(GRID9, seed=9)
        params = make_params(eta_db=0.0)
        analytic = success_probability(1, params, policy_scalar(1, 1.0), channel, RULE30).value
        res = simulate(single_content_cfg(trials=200_000, seed=31, eta_db=0.0),
                       channel=channel)
        expected = truncated_geometric_delay(analytic, params.max_arq, params.slot_time)
        assert res.cdd_cond_hat == pytest.approx(expected, rel=0.02)
        assert res.cdd_hat == pytest.approx(expected, rel=0.02)

    def test_deterministic_and_chunking_stable(self):
        cfg = single_content_cfg(trials=70_001, seed=77, eta_db=10.0)
        a, b = simulate(cfg), simulate(cfg)
        assert a.scdp_hat == b.scdp_hat
        assert a.cdd_hat == b.cdd_hat
        assert a.cdd_ci95 == b.cdd_ci95
        assert np.array_equal(a.per_content, b.per_content, equal_nan=True)

    def test_uncached_content_counts_as_failure(self):
        catalog = zipf_popularity(4, 1.0)
        policy = policy_top_k(4, 2)
        cfg = SimConfig(trials=40_000, seed=8, params=make_params(eta_db=-30.0),
                        catalog=catalog, policy=policy, grid=GRID1)
        res = simulate(cfg)
        covered = float(catalog.popularity[:2].sum())
        sigma = math.sqrt(covered * (1.0 - covered) / cfg.trials)
        assert abs(res.scdp_hat - covered) < 3.0 * sigma + 1e-3
        assert res.per_content is not None
        assert res.per_content[0] > 0.99
        assert res.per_content[2] == 0.0
        assert res.per_content[3] == 0.0

    def test_fixed_distance_variant_differs(self):
        cfg = single_content_cfg(trials=30_000, seed=4, eta_db=12.0)
        from dataclasses import replace

        res_redraw = simulate(cfg)
        res_fixed = simulate(replace(cfg, redraw_distance=False))
        # first-round statistics share the same law
        assert res_redraw.scdp_hat == res_fixed.scdp_hat
        # later rounds correlate through the shared distance
        assert res_redraw.cdd_hat != res_fixed.cdd_hat

    def test_confidence_interval_shrinks(self):
        small = simulate(single_content_cfg(trials=10_000, seed=6, eta_db=10.0))
        large = simulate(single_content_cfg(trials=160_000, seed=6, eta_db=10.0))
        assert large.scdp_ci95 < small.scdp_ci95


class TestSweep:
    def test_threshold_sweep_monotone(self):
        cfg = single_content_cfg(trials=50_000, seed=10)
        results = simulate_sweep(cfg, "eta_db", [-10.0, 0.0, 10.0])
        vals = [r.scdp_hat for r in results]
        for lo, hi in zip(vals[1:], vals):
            assert lo <= hi + 0.01

    def test_round_budget_sweep_monotone_delay(self):
        cfg = single_content_cfg(trials=50_000, seed=10, eta_db=10.0)
        results = simulate_sweep(cfg, "M", [1, 2, 3])
        delays = [r.cdd_hat for r in results]
        assert all(b >= a - 1e-6 for a, b in zip(delays, delays[1:]))
        assert delays[0] == pytest.approx(1e-3, rel=1e-12)

    def test_empty_values(self):
        cfg = single_content_cfg(trials=1000, seed=1)
        assert simulate_sweep(cfg, "eta_db", []) == []

    def test_port_and_aperture_axes(self):
        cfg = single_content_cfg(trials=20_000, seed=2, eta_db=10.0)
        res_n = simulate_sweep(cfg, "N", [1, 4, 9])
        vals = [r.scdp_hat for r in res_n]
        assert vals[0] <= vals[1] + 0.01 and vals[1] <= vals[2] + 0.01
        res_w = simulate_sweep(cfg, "W", [0.25, 1.0])
        assert res_w[0].scdp_hat <= res_w[1].scdp_hat + 0.01

    def test_q_axis_uses_scalar_policy(self):
        cfg = SimConfig(trials=30_000, seed=3, params=make_params(eta_db=0.0),
                        catalog=zipf_popularity(5, 1.0), policy=policy_top_k(5, 2),
                        grid=GRID1)
        results = simulate_sweep(cfg, "q_scalar", [0.2, 1.0])
        assert results[0].scdp_hat < results[1].scdp_hat

    def test_invalid_axis_rejected(self):
        cfg = single_content_cfg(trials=1000, seed=1)
        with pytest.raises(ValueError):
            simulate_sweep(cfg, "bandwidth", [1.0])
        with pytest.raises(ValueError):
            simulate_sweep(cfg, "N", [5])  # not a perfect square


class TestValidation:
    def test_bad_trials(self):
        with pytest.raises(ValueError):
            SimConfig(trials=0, seed=1, params=make_params(),
                      catalog=zipf_popularity(1, 0.0), policy=policy_scalar(1, 1.0),
                      grid=GRID1)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            SimConfig(trials=10, seed=1, params=make_params(),
                      catalog=zipf_popularity(3, 1.0), policy=policy_scalar(2, 1.0),
                      grid=GRID1)
