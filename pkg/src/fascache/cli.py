"""Command-line driver: sweeps, figure presets, CSV emission, plotting.

Subcommands
-----------
scdp    analytic (quadrature + adaptive oracle) and Monte-Carlo SCDP sweep
cdd     analytic, asymptotic and Monte-Carlo delivery delay sweep
mc      Monte-Carlo-only sweep
glrule  print a Gauss-Laguerre rule and its moment residual
plot    render a CSV produced by scdp/cdd/mc into a vector PDF

CSV files are UTF-8 with a header row and RFC-4180 quoting; the CSV is
the contract, plots are decoration.  Exit codes: 0 ok, 2 configuration
error, 3 numerical failure, 4 discrepancy flags present under --strict.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import make_channel
from .config import ConfigError, RunConfig, load_config
from .network import CachePolicy, zipf_popularity
from .metrics import (
    cdd,
    cdd_asymptotic,
    cross_check_tolerance,
    scdp,
    scdp_adaptive,
)
from .simulate import SimConfig, simulate_sweep
from .specfun import NumericsError, gauss_laguerre_rule

__all__ = ["main"]

SCDP_COLUMNS = ["curve", "axis", "axis_value", "scdp_analytic_gl",
                "scdp_analytic_adaptive", "scdp_mc", "mc_ci95", "flag"]
CDD_COLUMNS = ["curve", "axis", "axis_value", "cdd_analytic_ms",
               "cdd_asymptotic_ms", "cdd_mc_ms", "mc_ci95", "flag"]
MC_COLUMNS = ["curve", "axis", "axis_value", "scdp_mc", "scdp_ci95",
              "cdd_mc_ms", "cdd_ci95_ms"]

_AXIS_LABELS = {
    "eta_db": "SNR threshold η (dB)",
    "mu_s": "SBS intensity μ_S (1/m²)",
    "q_scalar": "caching probability q",
    "M": "ARQ rounds M",
    "N": "port count N",
    "W": "aperture side W (λ)",
}


def _load_run_config(args) -> RunConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("exactly one of --config or --preset is required")
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        cfg = load_config(path.read_text(encoding="utf-8"), name_hint=path.stem)
    else:
        ref = resources.files("fascache").joinpath(f"presets/{args.preset}.yaml")
        if not ref.is_file():
            available = sorted(
                p.name[:-5] for p in resources.files("fascache").joinpath("presets").iterdir()
            )
            raise ConfigError(f"unknown preset {args.preset!r}; available: {available}")
        cfg = load_config(ref.read_text(encoding="utf-8"), name_hint=args.preset)

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.quad_order is not None:
        overrides["quad_order"] = args.quad_order
    if overrides:
        doc = cfg.to_dict()
        doc["numerics"] = {**doc["numerics"], **overrides}
        cfg = RunConfig.from_dict(doc)
    return cfg


def _sim_config(cfg: RunConfig) -> SimConfig:
    return SimConfig(
        trials=cfg.numerics.trials,
        seed=cfg.numerics.seed,
        params=cfg.build_params(),
        catalog=cfg.build_catalog(),
        policy=cfg.build_policy(),
        grid=cfg.build_grid(),
    )


def _tracked_content_sim(cfg: RunConfig) -> SimConfig:
    """SimConfig whose every request asks for content 1 of ``cfg``."""
    q1 = float(cfg.build_policy().probs[0])
    return SimConfig(
        trials=cfg.numerics.trials,
        seed=cfg.numerics.seed,
        params=cfg.build_params(),
        catalog=zipf_popularity(1, 0.0),
        policy=CachePolicy(probs=np.array([q1]), capacity=1),
        grid=cfg.build_grid(),
    )


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def cmd_scdp(cfg: RunConfig, out_dir: Path, strict: bool) -> int:
    rule = gauss_laguerre_rule(cfg.numerics.quad_order)
    rows = []
    flagged = False
    for label, ccfg in cfg.curve_set():
        mc_results = simulate_sweep(_sim_config(ccfg), ccfg.sweep.axis, ccfg.sweep.values)
        channel = None
        grid_key = None
        for value, mc in zip(ccfg.sweep.values, mc_results):
            pinned = ccfg.with_axis(value)
            grid = pinned.build_grid()
            if grid != grid_key:
                channel = make_channel(grid, mvn_tol=pinned.numerics.mvn_tol,
                                       seed=pinned.numerics.seed)
                grid_key = grid
            params = pinned.build_params()
            catalog = pinned.build_catalog()
            policy = pinned.build_policy()
            gl = scdp(params, catalog, policy, channel, rule)
            adaptive = scdp_adaptive(params, catalog, policy, channel)
            flag = ""
            if abs(gl - adaptive) > cross_check_tolerance(pinned.numerics.mvn_tol):
                flag = "discrepancy"
                flagged = True
            rows.append({
                "curve": label,
                "axis": ccfg.sweep.axis,
                "axis_value": _fmt(value),
                "scdp_analytic_gl": _fmt(gl),
                "scdp_analytic_adaptive": _fmt(adaptive),
                "scdp_mc": _fmt(mc.scdp_hat),
                "mc_ci95": _fmt(mc.scdp_ci95),
                "flag": flag,
            })
    _write_csv(out_dir / f"{cfg.name}_scdp.csv", SCDP_COLUMNS, rows)
    print(f"wrote {out_dir / f'{cfg.name}_scdp.csv'} ({len(rows)} rows)")
    return 4 if strict and flagged else 0


def cmd_cdd(cfg: RunConfig, out_dir: Path, strict: bool) -> int:
    """Delay sweep for the tracked content (index 1, the most popular).

    The Monte-Carlo run pins the request stream to that content so the
    empirical delay estimates the same per-content quantity as the
    analytic column; under the scalar-q presets all contents are
    equivalent anyway.
    """
    rule = gauss_laguerre_rule(cfg.numerics.quad_order)
    rows = []
    flagged = False
    for label, ccfg in cfg.curve_set():
        mc_results = simulate_sweep(_tracked_content_sim(ccfg), ccfg.sweep.axis,
                                    ccfg.sweep.values)
        channel = None
        grid_key = None
        for value, mc in zip(ccfg.sweep.values, mc_results):
            pinned = ccfg.with_axis(value)
            grid = pinned.build_grid()
            if grid != grid_key:
                channel = make_channel(grid, mvn_tol=pinned.numerics.mvn_tol,
                                       seed=pinned.numerics.seed)
                grid_key = grid
            params = pinned.build_params()
            policy = pinned.build_policy()
            delay = cdd(1, params, policy, channel, rule)
            asymptote = cdd_asymptotic(1, params, policy, channel, rule)
            flag = "inf" if math.isinf(delay) else ""
            flagged = flagged or bool(flag)
            rows.append({
                "curve": label,
                "axis": ccfg.sweep.axis,
                "axis_value": _fmt(value),
                "cdd_analytic_ms": _fmt(delay * 1e3),
                "cdd_asymptotic_ms": _fmt(asymptote * 1e3),
                "cdd_mc_ms": _fmt(mc.cdd_hat * 1e3),
                "mc_ci95": _fmt(mc.cdd_ci95 * 1e3),
                "flag": flag,
            })
    _write_csv(out_dir / f"{cfg.name}_cdd.csv", CDD_COLUMNS, rows)
    print(f"wrote {out_dir / f'{cfg.name}_cdd.csv'} ({len(rows)} rows)")
    return 4 if strict and flagged else 0


def cmd_mc(cfg: RunConfig, out_dir: Path) -> int:
    rows = []
    for label, ccfg in cfg.curve_set():
        mc_results = simulate_sweep(_sim_config(ccfg), ccfg.sweep.axis, ccfg.sweep.values)
        for value, mc in zip(ccfg.sweep.values, mc_results):
            rows.append({
                "curve": label,
                "axis": ccfg.sweep.axis,
                "axis_value": _fmt(value),
                "scdp_mc": _fmt(mc.scdp_hat),
                "scdp_ci95": _fmt(mc.scdp_ci95),
                "cdd_mc_ms": _fmt(mc.cdd_hat * 1e3),
                "cdd_ci95_ms": _fmt(mc.cdd_ci95 * 1e3),
            })
    _write_csv(out_dir / f"{cfg.name}_mc.csv", MC_COLUMNS, rows)
    print(f"wrote {out_dir / f'{cfg.name}_mc.csv'} ({len(rows)} rows)")
    return 0


def cmd_glrule(order: int) -> int:
    rule = gauss_laguerre_rule(order)
    print(f"Gauss-Laguerre rule, order {order} (weights for the e^-x measure)")
    print(f"{'a':>4}  {'node':>24}  {'weight':>24}")
    for i, (node, weight) in enumerate(zip(rule.nodes, rule.weights), start=1):
        print(f"{i:>4}  {node:>24.16e}  {weight:>24.16e}")
    worst = 0.0
    k = 0
    fact = 1.0
    while k <= 2 * order - 1 and fact < 1e300:
        moment = float(np.dot(rule.weights, rule.nodes ** k))
        worst = max(worst, abs(moment - fact) / fact)
        k += 1
        fact *= k
    print(f"max relative moment residual over k <= {k - 1}: {worst:.3e}")
    return 0


def cmd_plot(csv_path: Path, out_dir: Path) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not csv_path.exists():
        raise ConfigError(f"CSV not found: {csv_path}")
    with csv_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        header = reader.fieldnames or []
    if not rows:
        raise ConfigError(f"CSV has no data rows: {csv_path}")

    if "scdp_analytic_gl" in header:
        y_col, mc_col, ci_col, y_label = ("scdp_analytic_gl", "scdp_mc", "mc_ci95", "SCDP")
    elif "cdd_analytic_ms" in header:
        y_col, mc_col, ci_col, y_label = ("cdd_analytic_ms", "cdd_mc_ms", "mc_ci95", "CDD (ms)")
    elif "scdp_mc" in header:
        y_col, mc_col, ci_col, y_label = ("scdp_mc", None, None, "SCDP (Monte-Carlo)")
    else:
        raise ConfigError(f"CSV columns not recognized: {header}")
    if mc_col is not None and mc_col not in header:
        print(f"warning: MC columns absent in {csv_path.name}, plotting analytic only",
              file=sys.stderr)
        mc_col = None

    axis = rows[0].get("axis", "axis_value")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for label in dict.fromkeys(row["curve"] for row in rows):
        sub = [row for row in rows if row["curve"] == label]
        x = np.array([float(row["axis_value"]) for row in sub])
        y = np.array([float(row[y_col]) for row in sub])
        line, = ax.plot(x, y, label=label)
        if mc_col:
            ym = np.array([float(row[mc_col]) for row in sub])
            err = np.array([float(row[ci_col]) for row in sub])
            ax.errorbar(x, ym, yerr=err, fmt="o", ms=3.5, capsize=2.0,
                        color=line.get_color(), linestyle="none")
    ax.set_xlabel(_AXIS_LABELS.get(axis, axis))
    ax.set_ylabel(y_label)
    ax.grid(True, alpha=0.3)
    ax.legend()
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / f"{csv_path.stem}.pdf"
    fig.savefig(target, format="pdf", bbox_inches="tight")
    plt.close(fig)
    print(f"wrote {target}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fascache",
        description="Cache-enabled mm-wave network performance with fluid-antenna users",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, strict=False):
        p.add_argument("--config", help="path to a YAML run configuration")
        p.add_argument("--preset", help="name of a shipped preset (fig2..fig6)")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, default=None, help="override numerics.seed")
        p.add_argument("--trials", type=int, default=None, help="override numerics.trials")
        p.add_argument("--quad-order", type=int, default=None, help="override numerics.quad_order")
        if strict:
            p.add_argument("--strict", action="store_true",
                           help="exit 4 when any row carries a flag")

    add_common(sub.add_parser("scdp", help="delivery-probability sweep"), strict=True)
    add_common(sub.add_parser("cdd", help="delivery-delay sweep"), strict=True)
    add_common(sub.add_parser("mc", help="Monte-Carlo-only sweep"))

    g = sub.add_parser("glrule", help="print Gauss-Laguerre nodes/weights")
    g.add_argument("--quad-order", type=int, default=30, help="rule order A (1..200)")

    p = sub.add_parser("plot", help="plot a CSV into a vector PDF")
    p.add_argument("--csv", required=True, help="CSV produced by scdp/cdd/mc")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "glrule":
            if not 1 <= args.quad_order <= 200:
                raise ConfigError(f"--quad-order must be in [1, 200], got {args.quad_order}")
            return cmd_glrule(args.quad_order)
        if args.command == "plot":
            return cmd_plot(Path(args.csv), Path(args.out))
        cfg = _load_run_config(args)
        out_dir = Path(args.out)
        if args.command == "scdp":
            return cmd_scdp(cfg, out_dir, args.strict)
        if args.command == "cdd":
            return cmd_cdd(cfg, out_dir, args.strict)
        if args.command == "mc":
            return cmd_mc(cfg, out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
