#!/usr/bin/env python3
"""Regenerate the bundled network fixtures under fixtures/.

ieee15.json is the classic 15-bus 11 kV radial feeder from the public
test-feeder literature (bus 1 substation, 14 branches, loads at 0.70 pf).
Impedances are converted from ohms to per-unit voltage drop per kW on an
11 kV / 1 MVA base, matching the toolkit's unit convention. Investment costs
follow the bundled default cost set (pole classes 1-6, 400 kW DG at $1000/kW,
$15k sectionalizers, $4000 repairs, $14/kWh shedding, $8/kWh DG energy).
Fragility curves are synthetic: labeled placeholders, not field data.

The tiny*.json fixtures are deliberately small so exhaustive enumeration of
their binaries stays cheap; they back the oracle-equivalence tests.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gridshield.network import network_from_dict, validate_network  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

KV_BASE = 11.0
MVA_BASE = 1.0
Z_BASE = KV_BASE ** 2 / MVA_BASE          # ohms
KW_BASE = MVA_BASE * 1000.0
OHM_TO_PU_PER_KW = 1.0 / (Z_BASE * KW_BASE)

# branch list: (from, to, R ohm, X ohm)
IEEE15_LINES = [
    (1, 2, 1.35309, 1.32349),
    (2, 3, 1.17024, 1.14464),
    (3, 4, 0.84111, 0.82271),
    (4, 5, 1.52348, 1.02760),
    (2, 9, 2.01317, 1.35790),
    (9, 10, 1.68671, 1.13770),
    (2, 6, 2.55727, 1.72490),
    (6, 7, 1.08820, 0.73400),
    (6, 8, 1.25143, 0.84410),
    (3, 11, 1.79553, 1.21110),
    (11, 12, 2.44845, 1.65150),
    (12, 13, 2.01317, 1.35790),
    (4, 14, 2.23081, 1.50470),
    (4, 15, 1.19702, 0.80740),
]

# loads at 0.70 lagging power factor: (bus, P kW, Q kVAr)
IEEE15_LOADS = {
    2: (44.100, 44.990), 3: (70.000, 71.414), 4: (140.000, 142.829),
    5: (44.100, 44.990), 6: (140.000, 142.829), 7: (140.000, 142.829),
    8: (70.000, 71.414), 9: (70.000, 71.414), 10: (44.100, 44.990),
    11: (140.000, 142.829), 12: (70.000, 71.414), 13: (44.100, 44.990),
    14: (70.000, 71.414), 15: (140.000, 142.829),
}

DG_CANDIDATES = {4, 6, 11, 15}
EXISTING_SECTIONALIZERS = {(2, 6): "from", (3, 11): "from"}  # keyed by (i, j)

POLE_COSTS = [0.0, 10000.0, 20000.0, 30000.0, 15000.0, 25000.0, 35000.0]
# per-step failure probability scale per class; weaker fragility as cost rises
POLE_FRAGILITY_SCALE = [1.00, 0.55, 0.32, 0.18, 0.42, 0.24, 0.12]
BASE_CURVE = [(0.0, 0.0), (15.0, 0.005), (25.0, 0.03), (35.0, 0.09),
              (45.0, 0.22), (60.0, 0.40), (80.0, 0.55)]

SHED_COST = 14.0        # $/kWh
DG_OP_COST = 8.0        # $/kWh
DG_KW = 400.0
DG_INSTALL = 1000.0 * DG_KW
SECTIONALIZER_COST = 15000.0
REPAIR_COST = 4000.0


def curve(cid: str, scale: float) -> dict:
    return {"id": cid,
            "breakpoints": [[w, round(p * scale, 6)] for w, p in BASE_CURVE]}


def pole_catalog(n_options: int, prefix: str) -> tuple[list, list]:
    catalog, curves = [], []
    for k in range(n_options):
        cid = f"{prefix}-{k}"
        label = "existing pole" if k == 0 else f"pole class {k}"
        catalog.append({"index": k, "label": label, "fragility": cid,
                        "repair_unit_cost": REPAIR_COST})
        curves.append(curve(cid, POLE_FRAGILITY_SCALE[k]))
    return catalog, curves


def ieee15() -> dict:
    buses = []
    for bid in range(1, 16):
        p, q = IEEE15_LOADS.get(bid, (0.0, 0.0))
        # the feeder's full-load minimum voltage is ~0.944 pu, so the usual
        # +-5% band would force shedding even on a calm day; use +-10% low side
        buses.append({
            "id": bid, "is_substation": bid == 1, "v_min": 0.90, "v_max": 1.05,
            "dg_candidate": bid in DG_CANDIDATES,
            "dg_p_max": DG_KW if bid in DG_CANDIDATES else 0.0,
            "dg_q_max": DG_KW if bid in DG_CANDIDATES else 0.0,
            "base_p_load": p, "base_q_load": q, "shed_cost": SHED_COST,
            "dg_op_cost": DG_OP_COST if bid in DG_CANDIDATES else 0.0,
            "dg_install_cost": DG_INSTALL if bid in DG_CANDIDATES else 0.0,
        })
    lines = []
    for (i, j, r_ohm, x_ohm) in IEEE15_LINES:
        sect = EXISTING_SECTIONALIZERS.get((i, j))
        lines.append({
            "from_bus": i, "to_bus": j,
            "resistance": round(r_ohm * OHM_TO_PU_PER_KW, 12),
            "reactance": round(x_ohm * OHM_TO_PU_PER_KW, 12),
            "p_max": 2000.0, "q_max": 2000.0,
            "existing_sectionalizer_from": sect == "from",
            "existing_sectionalizer_to": sect == "to",
            "sectionalizer_cost": SECTIONALIZER_COST,
            "hardening_costs": POLE_COSTS,
        })
    catalog, curves = pole_catalog(7, "synthetic")
    return {
        "buses": buses, "lines": lines, "pole_catalog": catalog,
        "params": {"v0": 1.0, "n_g_max": 2, "w_h": 1.0, "epsilon1": 0.0,
                   "big_m1": None, "fragility_curves": curves},
    }


def flat_curve(cid: str, p: float) -> dict:
    return {"id": cid, "breakpoints": [[0.0, p], [100.0, p]]}


def tiny2() -> dict:
    """Substation + one load bus, 2 pole options, no DG candidates."""
    return {
        "buses": [
            {"id": 1, "is_substation": True, "v_min": 0.95, "v_max": 1.05,
             "base_p_load": 0.0, "base_q_load": 0.0, "shed_cost": SHED_COST},
            {"id": 2, "v_min": 0.95, "v_max": 1.05, "base_p_load": 100.0,
             "base_q_load": 50.0, "shed_cost": SHED_COST},
        ],
        "lines": [
            {"from_bus": 1, "to_bus": 2, "resistance": 1e-05, "reactance": 1e-05,
             "p_max": 500.0, "q_max": 300.0, "sectionalizer_cost": 15000.0,
             "hardening_costs": [0.0, 10000.0]},
        ],
        "pole_catalog": [
            {"index": 0, "label": "existing pole", "fragility": "flat-40",
             "repair_unit_cost": REPAIR_COST},
            {"index": 1, "label": "pole class 1", "fragility": "flat-5",
             "repair_unit_cost": REPAIR_COST},
        ],
        "params": {"v0": 1.0, "n_g_max": 1, "w_h": 1.0, "epsilon1": 0.0,
                   "big_m1": None,
                   "fragility_curves": [flat_curve("flat-40", 0.40),
                                        flat_curve("flat-5", 0.05)]},
    }


def tiny3() -> dict:
    """Three-bus chain with a DG candidate at the far end and one existing
    sectionalizer, so enumeration exercises every first-stage lever."""
    return {
        "buses": [
            {"id": 1, "is_substation": True, "v_min": 0.95, "v_max": 1.05,
             "base_p_load": 0.0, "base_q_load": 0.0, "shed_cost": SHED_COST},
            {"id": 2, "v_min": 0.95, "v_max": 1.05, "base_p_load": 80.0,
             "base_q_load": 40.0, "shed_cost": SHED_COST},
            {"id": 3, "v_min": 0.95, "v_max": 1.05, "base_p_load": 120.0,
             "base_q_load": 60.0, "shed_cost": SHED_COST, "dg_candidate": True,
             "dg_p_max": 200.0, "dg_q_max": 150.0, "dg_op_cost": DG_OP_COST,
             "dg_install_cost": 1000.0},
        ],
        "lines": [
            {"from_bus": 1, "to_bus": 2, "resistance": 1.2e-05, "reactance": 1e-05,
             "p_max": 600.0, "q_max": 400.0, "sectionalizer_cost": 15000.0,
             "hardening_costs": [0.0, 10000.0]},
            {"from_bus": 2, "to_bus": 3, "resistance": 1.5e-05, "reactance": 1.1e-05,
             "p_max": 600.0, "q_max": 400.0, "sectionalizer_cost": 15000.0,
             "hardening_costs": [0.0, 10000.0],
             "existing_sectionalizer_to": True},
        ],
        "pole_catalog": [
            {"index": 0, "label": "existing pole", "fragility": "flat-35",
             "repair_unit_cost": REPAIR_COST},
            {"index": 1, "label": "pole class 1", "fragility": "flat-4",
             "repair_unit_cost": REPAIR_COST},
        ],
        "params": {"v0": 1.0, "n_g_max": 1, "w_h": 1.0, "epsilon1": 0.0,
                   "big_m1": None,
                   "fragility_curves": [flat_curve("flat-35", 0.35),
                                        flat_curve("flat-4", 0.04)]},
    }


def tiny2b() -> dict:
    """Two buses, three pole options, cheap DG at the load bus; meant to run
    with a 2-step horizon so absorbing damage shows up in enumeration."""
    return {
        "buses": [
            {"id": 1, "is_substation": True, "v_min": 0.95, "v_max": 1.05,
             "base_p_load": 0.0, "base_q_load": 0.0, "shed_cost": SHED_COST},
            {"id": 2, "v_min": 0.95, "v_max": 1.05, "base_p_load": 100.0,
             "base_q_load": 50.0, "shed_cost": SHED_COST, "dg_candidate": True,
             "dg_p_max": 150.0, "dg_q_max": 100.0, "dg_op_cost": DG_OP_COST,
             "dg_install_cost": 2000.0},
        ],
        "lines": [
            {"from_bus": 1, "to_bus": 2, "resistance": 1e-05, "reactance": 1e-05,
             "p_max": 500.0, "q_max": 300.0, "sectionalizer_cost": 15000.0,
             "hardening_costs": [0.0, 8000.0, 20000.0]},
        ],
        "pole_catalog": [
            {"index": 0, "label": "existing pole", "fragility": "flat-50",
             "repair_unit_cost": REPAIR_COST},
            {"index": 1, "label": "pole class 1", "fragility": "flat-15",
             "repair_unit_cost": REPAIR_COST},
            {"index": 2, "label": "pole class 2", "fragility": "flat-2",
             "repair_unit_cost": REPAIR_COST},
        ],
        "params": {"v0": 1.0, "n_g_max": 1, "w_h": 1.0, "epsilon1": 0.0,
                   "big_m1": None,
                   "fragility_curves": [flat_curve("flat-50", 0.50),
                                        flat_curve("flat-15", 0.15),
                                        flat_curve("flat-2", 0.02)]},
    }


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    for name, doc in [("ieee15", ieee15()), ("tiny2", tiny2()),
                      ("tiny3", tiny3()), ("tiny2b", tiny2b())]:
        net = network_from_dict(doc)
        rep = validate_network(net)
        assert rep.ok, f"{name}: {rep.errors}"
        path = FIXTURES / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {path} ({net.n_buses} buses, {net.n_lines} lines, "
              f"{net.n_pole_options} pole options; warnings: {len(rep.warnings)})")


if __name__ == "__main__":
    main()
