"""Acceptance suite: one test per release criterion, each printing a PASS line
(run with `pytest -s tests/test_acceptance.py` to see them).

Criteria 2 and 6 are exhaustive sweeps over every instance solved by this
module; the earlier tests register their (network, maps, solution) triples and
the sweep tests are defined last so the registry is complete when they run.
"""

import json
import time

import numpy as np
import pytest

from gridshield.formulation import (baseline_plan, build_extensive_form,
                                    extract_plan, extract_schedule, fix_plan)
from gridshield.network import parse_network
from gridshield.oracle import enumerate_optimal
from gridshield.report import cost_breakdown
from gridshield.scenarios import (HazardConfig, ScenarioConfig, generate_scenarios,
                                  perturb_loads, sample_damage, sample_wind,
                                  save_scenario_set)
from gridshield.solver import SolverConfig, solve
from util import (FIXTURES, GOLDEN, assert_dead_node_coupling, assert_table1,
                  zero_hazard_set)

GAP = 1e-4
EXACT = SolverConfig(mip_gap=1e-9)
RUN = SolverConfig(mip_gap=GAP, time_limit_s=900.0)

# every solved instance this module produces, swept by criteria 2 and 6
SOLVED: list[tuple] = []  # (label, net, maps, solution)


def register(label, net, maps, sol):
    SOLVED.append((label, net, maps, sol))
    return sol


@pytest.fixture(scope="module")
def ieee15():
    return parse_network(FIXTURES / "ieee15.json")


@pytest.fixture(scope="module")
def ieee15_sset(ieee15):
    return generate_scenarios(ieee15, ScenarioConfig(), 10, seed=7)


@pytest.fixture(scope="module")
def ieee15_pair(ieee15, ieee15_sset):
    """The reference run: free investment vs pinned baseline, same scenarios."""
    model, maps = build_extensive_form(ieee15, ieee15_sset)
    sol_with = register("ieee15-with", ieee15, maps, solve(model, RUN))
    model_b, maps_b = build_extensive_form(ieee15, ieee15_sset)
    fix_plan(model_b, maps_b, baseline_plan(ieee15))
    sol_base = register("ieee15-baseline", ieee15, maps_b, solve(model_b, RUN))
    assert sol_with.status in ("optimal", "feasible-gap")
    assert sol_base.status in ("optimal", "feasible-gap")
    bd_with = cost_breakdown(sol_with, maps, ieee15, ieee15_sset)
    bd_base = cost_breakdown(sol_base, maps_b, ieee15, ieee15_sset)
    return maps, sol_with, bd_with, maps_b, sol_base, bd_base


ORACLE_CASES = [
    ("tiny2", 2, 1, 6),    # two scenarios, damage under the existing pole
    ("tiny3", 1, 1, 7),    # chain with DG candidate + existing sectionalizer
    ("tiny2b", 1, 2, 0),   # two steps, hardening pays off
]


@pytest.mark.parametrize("name,n,horizon,seed", ORACLE_CASES)
def test_criterion_1_oracle_equivalence(name, n, horizon, seed):
    net = parse_network(FIXTURES / f"{name}.json")
    cfg = ScenarioConfig(hazard=HazardConfig(horizon_steps=horizon, dt_hours=2.0))
    sset = generate_scenarios(net, cfg, n, seed=seed)
    t0 = time.monotonic()
    oracle_obj, _, stats = enumerate_optimal(net, sset, limit=24, solver_cfg=EXACT)
    model, maps = build_extensive_form(net, sset)
    sol = register(f"oracle-{name}", net, maps, solve(model, EXACT))
    elapsed = time.monotonic() - t0
    rel = abs(sol.objective_value - oracle_obj) / max(1.0, abs(oracle_obj))
    tol = max(1e-6, EXACT.mip_gap)
    assert sol.status == "optimal"
    assert rel <= tol, f"{name}: oracle {oracle_obj} vs MILP {sol.objective_value}"
    assert elapsed < 120.0, f"{name}: oracle took {elapsed:.0f}s"
    print(f"PASS criterion 1 [{name}]: oracle == MILP "
          f"({oracle_obj:,.2f}, rel diff {rel:.1e}, {stats.n_lp_solves} LPs, "
          f"{elapsed:.1f}s)")


def test_criterion_3_dominance(ieee15, ieee15_pair):
    _, sol_with, bd_with, _, sol_base, bd_base = ieee15_pair
    slack = 2 * GAP * bd_base.total
    assert bd_with.total <= bd_base.total + slack, (
        f"with-investment {bd_with.total:,.2f} exceeds baseline "
        f"{bd_base.total:,.2f} + {slack:,.2f}")
    assert sol_with.solve_seconds + sol_base.solve_seconds < 900.0
    print(f"PASS criterion 3: dominance {bd_with.total:,.2f} <= "
          f"{bd_base.total:,.2f} + {slack:,.2f} "
          f"({sol_with.solve_seconds + sol_base.solve_seconds:.0f}s total)")


def test_criterion_4_branch_flow_hand_check():
    net = parse_network(FIXTURES / "tiny3.json")
    sset = zero_hazard_set(net, 1, 1)  # fixed base loads, no damage
    model, maps = build_extensive_form(net, sset)
    sol = register("lindistflow", net, maps, solve(model, EXACT))
    sched = extract_schedule(sol, maps, 0)
    assert np.all(sched.wo == 1)
    l1, l2 = net.lines
    v1 = 1.0
    v2 = v1 - (l1.resistance * (80.0 + 120.0) + l1.reactance * (40.0 + 60.0)) / net.v0
    v3 = v2 - (l2.resistance * 120.0 + l2.reactance * 60.0) / net.v0
    expected = np.array([v1, v2, v3])
    diff = np.abs(sched.v[:, 0] - expected).max()
    assert diff <= 1e-8, f"voltage recursion off by {diff}"
    print(f"PASS criterion 4: voltage recursion max deviation {diff:.2e} pu")


def test_criterion_5_zero_hazard(ieee15):
    sset = zero_hazard_set(ieee15, 10, 12)
    model, maps = build_extensive_form(ieee15, sset)
    sol = register("ieee15-zero-hazard", ieee15, maps, solve(model, RUN))
    bd = cost_breakdown(sol, maps, ieee15, sset)
    plan = extract_plan(sol, maps)
    invest = sum(ieee15.lines[li].hardening_costs[k]
                 for li, k in enumerate(plan.hardening))
    invest += sum(ieee15.bus(b).dg_install_cost for b in plan.dg)
    invest += sum(ieee15.lines[li].sectionalizer_cost
                  for li, _ in plan.sectionalizers)
    assert abs(bd.load_shed) <= 1e-6
    assert abs(bd.repair) <= 1e-6
    assert invest == 0.0
    print(f"PASS criterion 5: zero hazard -> shed {bd.load_shed:.2e}, "
          f"repair {bd.repair:.2e}, investment {invest:.1f}")


def test_criterion_7_scenario_statistics(ieee15):
    import copy
    net2 = parse_network(FIXTURES / "tiny2.json")
    for p in (0.1, 0.3, 0.7):
        net = copy.deepcopy(net2)
        for curve in net.fragility_curves.values():
            curve.breakpoints = [(0.0, p), (100.0, p)]
        prof = sample_wind(13, HazardConfig(horizon_steps=1), 10_000)
        zeta = sample_damage(prof, net, 13)
        rate = zeta[:, 0, 0, 0].mean()
        bound = 3.0 * (p * (1 - p) / 10_000) ** 0.5
        assert abs(rate - p) <= bound, f"p={p}: rate {rate} outside 3-sigma {bound}"
    pl, _ = perturb_loads(net2, 0.3, 29, 10_000, 1)
    vals = pl[:, 1, 0]
    assert vals.min() >= 70.0 - 1e-9 and vals.max() <= 130.0 + 1e-9
    assert abs(vals.mean() - 100.0) <= 1.5
    print(f"PASS criterion 7: damage rates within 3-sigma at p in (0.1, 0.3, 0.7); "
          f"loads in [{vals.min():.1f}, {vals.max():.1f}], mean {vals.mean():.2f}")


def test_criterion_8_determinism(ieee15, ieee15_sset, tmp_path):
    cfg = ScenarioConfig()
    for i in (1, 2):
        save_scenario_set(generate_scenarios(ieee15, cfg, 10, seed=7),
                          tmp_path / f"s{i}.json")
    assert (tmp_path / "s1.json").read_bytes() == (tmp_path / "s2.json").read_bytes()
    mps1 = build_extensive_form(ieee15, ieee15_sset)[0].to_mps()
    mps2 = build_extensive_form(ieee15, ieee15_sset)[0].to_mps()
    assert mps1 == mps2
    print(f"PASS criterion 8: scenario JSON and MPS byte-identical across runs "
          f"({len(mps1)} MPS bytes)")


def test_criterion_9_golden_regression(ieee15, ieee15_sset, ieee15_pair):
    golden = json.loads((GOLDEN / "ieee15_golden.json").read_text())
    assert ieee15_sset.config_digest == golden["config_digest"]
    _, _, bd_with, _, _, bd_base = ieee15_pair
    for got, key in ((bd_with.total, "total_with"), (bd_base.total, "total_without")):
        rel = abs(got - golden[key]) / golden[key]
        assert rel <= 2 * GAP, f"{key}: {got} vs golden {golden[key]} (rel {rel:.1e})"
    shed_w = [row["shed"] for row in bd_with.per_scenario]
    shed_o = [row["shed"] for row in bd_base.per_scenario]
    savings = [100.0 * (o - w) / o if o > 0 else 0.0 for o, w in zip(shed_o, shed_w)]
    mean_savings = float(np.mean(savings))
    assert abs(mean_savings - golden["mean_shed_savings_pct"]) <= 1.0
    assert mean_savings >= 0.0
    bracket = "inside" if 5.0 <= mean_savings <= 40.0 else "outside"
    print(f"PASS criterion 9: objective {bd_with.total:,.2f} matches golden within "
          f"{2 * GAP:.0e}; mean shed savings {mean_savings:.2f}% "
          f"({bracket} the expected 5-40% order; reported, not gated)")


# -- exhaustive sweeps over everything solved above ---------------------------------


def iter_schedules():
    for label, net, maps, sol in SOLVED:
        if sol.status not in ("optimal", "feasible-gap"):
            continue
        for pos in range(len(maps.scenarios)):
            yield label, net, extract_schedule(sol, maps, pos)


def test_criterion_2_switch_table_conformance(ieee15_pair):
    checked = 0
    for label, net, sched in iter_schedules():
        assert_table1(sched)
        checked += 1
    assert checked >= 25  # pair (2x10) + oracle cases + hand checks
    print(f"PASS criterion 2: switch truth table exact on {checked} schedules "
          f"across {len(SOLVED)} solved instances")


def test_criterion_6_dead_node_coupling(ieee15_pair):
    checked = 0
    for label, net, sched in iter_schedules():
        assert_dead_node_coupling(net, sched)
        checked += 1
    assert checked >= 25
    print(f"PASS criterion 6: dead-node coupling holds on {checked} schedules")
