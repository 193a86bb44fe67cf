import copy

import numpy as np
import pytest

from gridshield.errors import ReportError
from gridshield.formulation import (PlanDecision, baseline_plan, build_extensive_form,
                                    extract_plan, extract_schedule)
from gridshield.network import network_from_dict
from gridshield.report import (compare_rod, cost_breakdown, emit_report,
                               evaluate_plan, render_comparison_svg, schedule_csv)
from gridshield.scenarios import HazardConfig, ScenarioConfig, generate_scenarios
from gridshield.solver import SolverConfig, solve
from util import assert_schedule_invariants, manual_set, zero_hazard_set

EXACT = SolverConfig(mip_gap=1e-9)


def flattened_to_one(net):
    net = copy.deepcopy(net)
    for curve in net.fragility_curves.values():
        curve.breakpoints = [(0.0, 1.0), (100.0, 1.0)]
    return net


def test_undamaged_toy_breakdown(tiny3):
    sset = zero_hazard_set(tiny3, 1, 2)
    model, maps = build_extensive_form(tiny3, sset)
    sol = solve(model, EXACT)
    bd = cost_breakdown(sol, maps, tiny3, sset)
    assert bd.load_shed == pytest.approx(0.0, abs=1e-6)
    assert bd.repair == pytest.approx(0.0, abs=1e-6)
    assert bd.dg_operation >= 0.0
    assert bd.total == pytest.approx(sol.objective_value, rel=1e-6)


def test_shed_weighting_arithmetic(tiny2):
    # bus sheds 100 kW for one 2 h step at $14/kWh in each p=0.1 scenario:
    # every scenario contributes 0.1 * 1 * 100 * 2 * 14 = $280 to the total
    net = flattened_to_one(tiny2)
    cfg = ScenarioConfig(hazard=HazardConfig(horizon_steps=1), perturb_range=0.0)
    sset = generate_scenarios(net, cfg, 10, seed=1)
    model, maps = build_extensive_form(net, sset)
    sol = solve(model, EXACT)
    bd = cost_breakdown(sol, maps, net, sset)
    per = bd.per_scenario[0]
    assert per["shed"] == pytest.approx(2800.0, rel=1e-9)
    assert per["probability"] * net.w_h * per["shed"] == pytest.approx(280.0, rel=1e-9)
    assert bd.load_shed == pytest.approx(2800.0, rel=1e-9)
    assert bd.repair == pytest.approx(4000.0, rel=1e-9)
    assert bd.investment == pytest.approx(0.0, abs=1e-9)
    assert bd.total == pytest.approx(6800.0, rel=1e-9)


DG_ISLAND_NET = {
    "buses": [
        {"id": 1, "is_substation": True, "v_min": 0.95, "v_max": 1.05,
         "base_p_load": 0.0, "base_q_load": 0.0, "shed_cost": 14.0},
        {"id": 2, "v_min": 0.95, "v_max": 1.05, "base_p_load": 0.0,
         "base_q_load": 0.0, "shed_cost": 14.0},
        {"id": 3, "v_min": 0.95, "v_max": 1.05, "base_p_load": 400.0,
         "base_q_load": 200.0, "shed_cost": 14.0, "dg_candidate": True,
         "dg_p_max": 400.0, "dg_q_max": 300.0, "dg_op_cost": 8.0,
         "dg_install_cost": 1000.0},
    ],
    "lines": [
        {"from_bus": 1, "to_bus": 2, "resistance": 1e-05, "reactance": 1e-05,
         "p_max": 800.0, "q_max": 500.0, "sectionalizer_cost": 15000.0,
         "hardening_costs": [0.0, 10000.0]},
        {"from_bus": 2, "to_bus": 3, "resistance": 1e-05, "reactance": 1e-05,
         "p_max": 800.0, "q_max": 500.0, "sectionalizer_cost": 15000.0,
         "hardening_costs": [0.0, 10000.0], "existing_sectionalizer_to": True},
    ],
    "pole_catalog": [
        {"index": 0, "label": "existing pole", "fragility": "f0",
         "repair_unit_cost": 4000.0},
        {"index": 1, "label": "pole class 1", "fragility": "f1",
         "repair_unit_cost": 4000.0},
    ],
    "params": {"v0": 1.0, "n_g_max": 1, "w_h": 1.0, "epsilon1": 0.0, "big_m1": None,
               "fragility_curves": [
                   {"id": "f0", "breakpoints": [[0.0, 0.5], [100.0, 0.5]]},
                   {"id": "f1", "breakpoints": [[0.0, 0.1], [100.0, 0.1]]}]},
}


def test_dg_islanding_energy_cost():
    """Feeder head destroyed under every pole class; the existing sectionalizer
    isolates the damaged segment and a 400 kW DG carries the load for one 2 h
    step at $8/kWh: 400 * 2 * 8 = $6400 of DG energy."""
    net = network_from_dict(DG_ISLAND_NET)
    zeta = np.zeros((2, 2, 1), dtype=np.uint8)
    zeta[0, :, 0] = 1  # line 1-2 destroyed whatever the pole class
    sset = manual_set(net, [zeta])
    model, maps = build_extensive_form(net, sset)
    sol = solve(model, EXACT)
    bd = cost_breakdown(sol, maps, net, sset)
    plan = extract_plan(sol, maps)
    assert plan.dg == [3]
    assert bd.investment == pytest.approx(1000.0, rel=1e-9)
    assert bd.dg_operation == pytest.approx(6400.0, rel=1e-9)
    assert bd.load_shed == pytest.approx(0.0, abs=1e-6)
    assert bd.repair == pytest.approx(4000.0, rel=1e-9)
    sched = extract_schedule(sol, maps, 0)
    assert sched.yc[1, 1, 0] == 1 and sched.wo[1, 0] == 0  # island boundary open
    assert sched.wm[2, 0] == 1 and sched.pg[2, 0] == pytest.approx(400.0)
    assert_schedule_invariants(net, sched)


def test_breakdown_rejects_tampered_objective(tiny2):
    sset = zero_hazard_set(tiny2, 1, 1)
    model, maps = build_extensive_form(tiny2, sset)
    sol = solve(model, EXACT)
    sol.objective_value += 1000.0
    with pytest.raises(ReportError, match="disagrees"):
        cost_breakdown(sol, maps, tiny2, sset)


def test_compare_rod_zero_hazard_no_savings(tiny3):
    sset = zero_hazard_set(tiny3, 2, 1)
    rep = compare_rod(tiny3, sset, EXACT)
    assert rep.savings_pct == [0.0, 0.0]
    assert rep.mean_savings_pct == 0.0
    assert rep.total_with <= rep.total_without + 1e-6


def test_compare_rod_dominance_with_damage(tiny2b):
    zeta = np.zeros((1, 3, 2), dtype=np.uint8)
    zeta[0, 0, :] = 1
    sset = manual_set(tiny2b, [zeta])
    rep = compare_rod(tiny2b, sset, EXACT)
    assert rep.total_with <= rep.total_without * (1 + 2e-9)
    assert rep.shed_without[0] > rep.shed_with[0]
    assert rep.plan_summary["investment"] > 0


def test_evaluate_plan_baseline_zero_investment(tiny3):
    sset = zero_hazard_set(tiny3, 1, 1)
    _, _, bd = evaluate_plan(tiny3, sset, baseline_plan(tiny3), EXACT)
    assert bd.investment == pytest.approx(0.0, abs=1e-9)


def test_emit_report_files_and_determinism(tiny2b, tmp_path):
    zeta = np.zeros((1, 3, 2), dtype=np.uint8)
    zeta[0, 0, :] = 1
    sset = manual_set(tiny2b, [zeta])
    rep = compare_rod(tiny2b, sset, EXACT)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    emit_report(rep, out1)
    emit_report(rep, out2)
    for name in ("summary.csv", "breakdown.csv", "comparison.svg"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    lines = (out1 / "summary.csv").read_text().splitlines()
    assert lines[0] == "scenario_id,shed_with,shed_without,savings_pct,dg_op,repair,total"
    assert len(lines) == 1 + sset.n
    blines = (out1 / "breakdown.csv").read_text().splitlines()
    assert blines[0] == "component,value"
    assert any(ln.startswith("investment,") for ln in blines)


def test_emit_report_ten_scenario_rows(ieee15, tmp_path):
    # shape check only: hand-built report, no solving
    from gridshield.report import ComparisonReport
    from gridshield.formulation import CostBreakdown
    bd = CostBreakdown(0, 0, 0, 0, 0, 0, [])
    rep = ComparisonReport(
        scenario_ids=list(range(10)), shed_with=[1.0] * 10, shed_without=[2.0] * 10,
        savings_pct=[50.0] * 10, dg_op_with=[0.0] * 10, repair_with=[0.0] * 10,
        total_per_scenario=[1.0] * 10, mean_savings_pct=50.0, total_with=1.0,
        total_without=2.0, plan=PlanDecision([0], [], []), breakdown_with=bd,
        breakdown_without=bd)
    emit_report(rep, tmp_path)
    assert len((tmp_path / "summary.csv").read_text().splitlines()) == 11


def test_emit_report_empty_rejected(tmp_path):
    from gridshield.report import ComparisonReport
    from gridshield.formulation import CostBreakdown
    bd = CostBreakdown(0, 0, 0, 0, 0, 0, [])
    rep = ComparisonReport([], [], [], [], [], [], [], 0.0, 0.0, 0.0,
                           PlanDecision([0], [], []), bd, bd)
    with pytest.raises(ReportError, match="empty"):
        emit_report(rep, tmp_path)


def test_svg_contains_bars_and_labels(tiny2b):
    zeta = np.zeros((1, 3, 1), dtype=np.uint8)
    sset = manual_set(tiny2b, [zeta])
    rep = compare_rod(tiny2b, sset, EXACT)
    svg = render_comparison_svg(rep)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<rect") >= 2 * sset.n
    assert "S0" in svg


def test_schedule_csv_shape(tiny2):
    sset = zero_hazard_set(tiny2, 2, 2)
    model, maps = build_extensive_form(tiny2, sset)
    sol = solve(model, EXACT)
    text = schedule_csv(maps, sol)
    lines = text.splitlines()
    # header + per (scenario, t): one row per line + one per bus
    assert len(lines) == 1 + 2 * 2 * (tiny2.n_lines + tiny2.n_buses)
    assert lines[0].startswith("scenario,t,entity_kind,entity_id")
