#!/usr/bin/env python3
"""End-to-end experiment on the bundled 15-bus feeder.

Generates the reference scenario set (10 scenarios, 12 x 2 h steps, 30% load
perturbation, seed 7), solves the two-stage investment model, evaluates the
optimized plan against the do-nothing baseline, and drops every artifact under
out/ieee15/: scenarios.json, plan.json, solution.csv, summary.csv,
breakdown.csv, comparison.svg and run manifests.

Usage: python3 scripts/run_ieee15.py [--seed 7] [--scenarios 10] [--gap 1e-4]
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from gridshield.cli import main as cli  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--scenarios", type=int, default=10)
    ap.add_argument("--gap", type=float, default=1e-4)
    ap.add_argument("--out", default=str(REPO / "out" / "ieee15"))
    args = ap.parse_args()

    network = str(REPO / "fixtures" / "ieee15.json")
    out = args.out
    steps = [
        ["generate", "--network", network, "--scenarios", str(args.scenarios),
         "--seed", str(args.seed), "--perturb", "0.30", "--out", out],
        ["solve", "--network", network, "--scenarios", f"{out}/scenarios.json",
         "--gap", str(args.gap), "--out", out, "--keep-files"],
        ["evaluate", "--network", network, "--scenarios", f"{out}/scenarios.json",
         "--gap", str(args.gap), "--out", out],
    ]
    for argv in steps:
        print(f"$ gridshield {' '.join(argv)}")
        rc = cli(argv)
        if rc != 0:
            return rc
    print(f"\nartifacts in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
