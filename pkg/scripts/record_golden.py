#!/usr/bin/env python3
"""Record the canonical 15-bus regression numbers into tests/golden/.

Runs the reference comparison (seed 7, 10 scenarios, 12 x 2 h steps, 30% load
perturbation, MIP gap 1e-4) and freezes total objectives and mean shedding
savings. The regression test replays the identical run and requires agreement
within twice the solver gap, so refresh this file only when the formulation or
the scenario sampler intentionally changes.
"""

import json
import sys
import time
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from gridshield.network import parse_network          # noqa: E402
from gridshield.report import compare_rod             # noqa: E402
from gridshield.scenarios import ScenarioConfig, generate_scenarios  # noqa: E402
from gridshield.solver import SolverConfig            # noqa: E402

SEED, N_SCENARIOS, GAP = 7, 10, 1e-4


def main() -> None:
    net = parse_network(REPO / "fixtures" / "ieee15.json")
    cfg = ScenarioConfig()
    sset = generate_scenarios(net, cfg, N_SCENARIOS, seed=SEED)
    t0 = time.monotonic()
    rep = compare_rod(net, sset, SolverConfig(mip_gap=GAP, time_limit_s=900.0))
    elapsed = time.monotonic() - t0
    doc = {
        "network": "fixtures/ieee15.json",
        "seed": SEED,
        "n_scenarios": N_SCENARIOS,
        "config_digest": sset.config_digest,
        "mip_gap": GAP,
        "total_with": rep.total_with,
        "total_without": rep.total_without,
        "mean_shed_savings_pct": rep.mean_savings_pct,
        "investment": rep.breakdown_with.investment,
        "solve_wall_seconds": round(elapsed, 1),
    }
    out = REPO / "tests" / "golden" / "ieee15_golden.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=1) + "\n")
    print(json.dumps(doc, indent=1))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
