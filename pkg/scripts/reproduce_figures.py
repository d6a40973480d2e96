#!/usr/bin/env python3
"""Reproduce every shipped performance-curve preset as CSV + PDF.

Runs the analytic sweeps, the adaptive cross-check, and the Monte-Carlo
oracle for fig2..fig6 and renders each CSV.  With default trial counts
this takes a few minutes; pass --trials to trade accuracy for speed.

    python scripts/reproduce_figures.py --out out [--trials 100000] [--seed N]
"""

import argparse
import sys
import time

from fascache.cli import main as fascache_main

PRESETS = (
    ("fig2", "scdp"),
    ("fig3", "scdp"),
    ("fig4", "scdp"),
    ("fig5", "cdd"),
    ("fig6", "cdd"),
)


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--trials", type=int, default=None,
                        help="override Monte-Carlo trials per sweep point")
    parser.add_argument("--seed", type=int, default=None, help="override the seed")
    args = parser.parse_args(argv)

    overall = time.perf_counter()
    for preset, command in PRESETS:
        cli_args = [command, "--preset", preset, "--out", args.out]
        if args.trials is not None:
            cli_args += ["--trials", str(args.trials)]
        if args.seed is not None:
            cli_args += ["--seed", str(args.seed)]
        started = time.perf_counter()
        code = fascache_main(cli_args)
        if code != 0:
            print(f"{preset}: {command} failed with exit code {code}", file=sys.stderr)
            return code
        suffix = "scdp" if command == "scdp" else "cdd"
        code = fascache_main(["plot", "--csv", f"{args.out}/{preset}_{suffix}.csv",
                              "--out", args.out])
        if code != 0:
            return code
        print(f"{preset}: done in {time.perf_counter() - started:.0f}s")
    print(f"all presets reproduced in {time.perf_counter() - overall:.0f}s")
    return 0


if __name__ == "__main__":
    sys.exit(run())
