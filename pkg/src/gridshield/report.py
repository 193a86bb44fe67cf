"""Cost decomposition, with/without-investment comparison, and report emission.

All dollar figures are recomputed from extracted variable values and the input
data, never read off the solver's objective report; the recomputed total must
agree with the solver to 1e-6 relative or the run is rejected as a formulation
bug. Savings are quoted on load-shedding cost per scenario (the operational
story) and on the total objective (the planning story).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ReportError
from .formulation import (CostBreakdown, ExtensiveFormMaps, FormulationOptions,
                          PlanDecision, baseline_plan, build_extensive_form,
                          extract_plan, extract_schedule, fix_plan)
from .milp import Solution
from .network import Network
from .scenarios import ScenarioSet
from .solver import SolverConfig, solve

_TOL = 1e-6


def cost_breakdown(solution: Solution, maps: ExtensiveFormMaps, net: Network,
                   scenario_set: ScenarioSet) -> CostBreakdown:
    """Recompute every objective component from raw variable values."""
    if solution.status not in ("optimal", "feasible-gap"):
        raise ReportError(f"no breakdown for status {solution.status!r}")
    vals = solution.values
    first = maps.first

    investment = 0.0
    for li, ln in enumerate(net.lines):
        for k in range(net.n_pole_options):
            investment += ln.hardening_costs[k] * vals[first.xh[li][k].index]
        for n in (ln.from_bus, ln.to_bus):
            investment += ln.sectionalizer_cost * vals[first.xc1[(li, n)].index]
    for b in net.buses:
        if b.dg_candidate:
            investment += b.dg_install_cost * vals[first.xg[b.id].index]

    dt = scenario_set.dt_hours
    per_scenario: list[dict] = []
    load_shed = dg_operation = repair = 0.0
    ordered = sorted(scenario_set.scenarios, key=lambda sc: sc.id)
    for pos, sc in enumerate(ordered):
        blk = maps.scenarios[pos]
        shed_s = sum(b.shed_cost * float(sc.p_load[bpos, t]) * dt
                     * vals[blk.yr[bpos][t].index]
                     for bpos, b in enumerate(net.buses)
                     for t in range(scenario_set.horizon_steps))
        dg_s = sum(b.dg_op_cost * dt * vals[blk.pg[b.id][t].index]
                   for b in net.buses if b.id in blk.pg and b.dg_op_cost > 0.0
                   for t in range(scenario_set.horizon_steps))
        rep_s = sum(vals[ref.index] for ref in blk.cr)
        w = net.w_h * sc.probability
        load_shed += w * shed_s
        dg_operation += w * dg_s
        repair += w * rep_s
        per_scenario.append({"scenario_id": sc.id, "probability": sc.probability,
                             "shed": shed_s, "dg_op": dg_s, "repair": rep_s,
                             "phi": shed_s + dg_s + rep_s})

    expected = load_shed + dg_operation + repair
    total = investment + expected
    denom = max(1.0, abs(total))
    if abs(total - solution.objective_value) / denom > _TOL:
        raise ReportError(
            f"recomputed total {total!r} disagrees with solver objective "
            f"{solution.objective_value!r} beyond {_TOL} relative")
    return CostBreakdown(investment=investment, load_shed=load_shed,
                         dg_operation=dg_operation, repair=repair,
                         expected_second_stage=expected, total=total,
                         per_scenario=per_scenario)


@dataclass
class ComparisonReport:
    scenario_ids: list[int]
    shed_with: list[float]
    shed_without: list[float]
    savings_pct: list[float]
    dg_op_with: list[float]
    repair_with: list[float]
    total_per_scenario: list[float]   # investment + hazard-rate-weighted phi(s)
    mean_savings_pct: float
    total_with: float
    total_without: float
    plan: PlanDecision
    breakdown_with: CostBreakdown
    breakdown_without: CostBreakdown
    plan_summary: dict = field(default_factory=dict)


def _savings_pct(without: float, with_: float) -> float:
    if without > 0.0:
        pct = 100.0 * (without - with_) / without
        return pct if abs(pct) > 1e-9 else 0.0
    return 0.0


def evaluate_plan(net: Network, scenario_set: ScenarioSet, plan: PlanDecision,
                  solver_cfg: SolverConfig,
                  options: FormulationOptions | None = None,
                  ) -> tuple[Solution, ExtensiveFormMaps, CostBreakdown]:
    """Solve the recourse problem with the first stage pinned to a given plan."""
    model, maps = build_extensive_form(net, scenario_set, options)
    fix_plan(model, maps, plan)
    sol = solve(model, solver_cfg)
    if sol.status not in ("optimal", "feasible-gap"):
        raise ReportError(f"plan evaluation ended with status {sol.status!r}")
    return sol, maps, cost_breakdown(sol, maps, net, scenario_set)


def compare_rod(net: Network, scenario_set: ScenarioSet, solver_cfg: SolverConfig,
                options: FormulationOptions | None = None) -> ComparisonReport:
    """Free-investment solve versus the pinned do-nothing baseline on the same
    scenario set; per-scenario shedding costs and the savings they imply."""
    model, maps = build_extensive_form(net, scenario_set, options)
    sol_with = solve(model, solver_cfg)
    if sol_with.status not in ("optimal", "feasible-gap"):
        raise ReportError(f"investment solve ended with status {sol_with.status!r}")
    plan = extract_plan(sol_with, maps)
    bd_with = cost_breakdown(sol_with, maps, net, scenario_set)

    _, _, bd_base = evaluate_plan(net, scenario_set, baseline_plan(net), solver_cfg,
                                  options)

    ids = [row["scenario_id"] for row in bd_with.per_scenario]
    shed_w = [row["shed"] for row in bd_with.per_scenario]
    shed_o = [row["shed"] for row in bd_base.per_scenario]
    savings = [_savings_pct(o, w) for o, w in zip(shed_o, shed_w)]
    totals = [bd_with.investment + net.w_h * row["phi"] for row in bd_with.per_scenario]
    summary = {
        "hardened_lines": sum(1 for k in plan.hardening if k != 0),
        "dg_buses": list(plan.dg),
        "new_sectionalizers": len(plan.sectionalizers),
        "investment": bd_with.investment,
    }
    return ComparisonReport(
        scenario_ids=ids, shed_with=shed_w, shed_without=shed_o,
        savings_pct=savings,
        dg_op_with=[row["dg_op"] for row in bd_with.per_scenario],
        repair_with=[row["repair"] for row in bd_with.per_scenario],
        total_per_scenario=totals,
        mean_savings_pct=float(np.mean(savings)) if savings else 0.0,
        total_with=bd_with.total, total_without=bd_base.total,
        plan=plan, breakdown_with=bd_with, breakdown_without=bd_base,
        plan_summary=summary,
    )


# -- emission -------------------------------------------------------------------

SUMMARY_COLUMNS = ["scenario_id", "shed_with", "shed_without", "savings_pct",
                   "dg_op", "repair", "total"]
BREAKDOWN_COLUMNS = ["component", "value"]


def _fmt(v: float) -> str:
    return format(v, ".6f")


def emit_report(report: ComparisonReport, out_dir) -> list[Path]:
    """Write summary.csv (one row per scenario), breakdown.csv and the grouped
    bar chart comparison.svg. Emission is deterministic: same report, same bytes."""
    if not report.scenario_ids:
        raise ReportError("refusing to emit a report for an empty scenario set")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    summary = out / "summary.csv"
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for i, sid in enumerate(report.scenario_ids):
            w.writerow([sid, _fmt(report.shed_with[i]), _fmt(report.shed_without[i]),
                        _fmt(report.savings_pct[i]), _fmt(report.dg_op_with[i]),
                        _fmt(report.repair_with[i]), _fmt(report.total_per_scenario[i])])

    bd = report.breakdown_with
    breakdown = out / "breakdown.csv"
    with open(breakdown, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BREAKDOWN_COLUMNS)
        for name, val in [
            ("investment", bd.investment), ("load_shed", bd.load_shed),
            ("dg_operation", bd.dg_operation), ("repair", bd.repair),
            ("expected_second_stage", bd.expected_second_stage), ("total", bd.total),
            ("total_without", report.total_without),
            ("mean_shed_savings_pct", report.mean_savings_pct),
        ]:
            w.writerow([name, _fmt(val)])

    svg = out / "comparison.svg"
    svg.write_text(render_comparison_svg(report))
    return [summary, breakdown, svg]


def render_comparison_svg(report: ComparisonReport) -> str:
    """Grouped bar chart of per-scenario shedding cost, with vs without the plan.
    Hand-rolled SVG so reports need no charting dependency."""
    width, height = 900, 420
    ml, mr, mt, mb = 70, 20, 40, 50
    plot_w, plot_h = width - ml - mr, height - mt - mb
    n = len(report.scenario_ids)
    vmax = max(max(report.shed_with, default=0.0), max(report.shed_without, default=0.0))
    vmax = vmax if vmax > 0 else 1.0
    group_w = plot_w / n
    bar_w = group_w * 0.35

    def bar(x, val, color):
        h = plot_h * val / vmax
        y = mt + plot_h - h
        return (f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                f'height="{h:.2f}" fill="{color}"/>')

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        '<style>text{font-family:monospace;font-size:12px;}</style>',
        f'<text x="{ml}" y="20">Load shedding cost by scenario ($)</text>',
        f'<rect x="{width - 260}" y="8" width="12" height="12" fill="#4477aa"/>',
        f'<text x="{width - 243}" y="19">with investment</text>',
        f'<rect x="{width - 130}" y="8" width="12" height="12" fill="#cc6677"/>',
        f'<text x="{width - 113}" y="19">without</text>',
        f'<line x1="{ml}" y1="{mt + plot_h}" x2="{width - mr}" y2="{mt + plot_h}" '
        'stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + plot_h}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = mt + plot_h * (1 - frac)
        parts.append(f'<text x="4" y="{y + 4:.2f}">{_fmt(vmax * frac)}</text>')
        parts.append(f'<line x1="{ml - 4}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" '
                     'stroke="black"/>')
    for i, sid in enumerate(report.scenario_ids):
        x0 = ml + i * group_w + group_w * 0.12
        parts.append(bar(x0, report.shed_with[i], "#4477aa"))
        parts.append(bar(x0 + bar_w + group_w * 0.06, report.shed_without[i], "#cc6677"))
        parts.append(f'<text x="{ml + i * group_w + group_w / 2 - 8:.2f}" '
                     f'y="{mt + plot_h + 16}">S{sid}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def schedule_csv(maps: ExtensiveFormMaps, solution: Solution) -> str:
    """Flat CSV of every scenario's operating state, one row per (scenario, step,
    entity); line rows fill the flow/switch columns, bus rows the nodal ones."""
    net = maps.net
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["scenario", "t", "entity_kind", "entity_id",
                "P", "Q", "wo", "u", "yc_from", "yc_to", "won_from", "won_to", "cr",
                "V", "wm", "yr", "Pg", "Qg"])
    for pos in range(len(maps.scenarios)):
        sched = extract_schedule(solution, maps, pos)
        horizon = sched.p.shape[1]
        for t in range(horizon):
            for li, ln in enumerate(net.lines):
                w.writerow([sched.scenario_id, t, "line",
                            f"{ln.from_bus}-{ln.to_bus}",
                            _fmt(sched.p[li, t]), _fmt(sched.q[li, t]),
                            sched.wo[li, t], sched.u[li, t],
                            sched.yc[li, 0, t], sched.yc[li, 1, t],
                            sched.won[li, 0, t], sched.won[li, 1, t],
                            _fmt(sched.cr[li]), "", "", "", "", ""])
            for bpos, b in enumerate(net.buses):
                w.writerow([sched.scenario_id, t, "bus", b.id,
                            "", "", "", "", "", "", "", "", "",
                            _fmt(sched.v[bpos, t]), sched.wm[bpos, t],
                            _fmt(sched.yr[bpos, t]), _fmt(sched.pg[bpos, t]),
                            _fmt(sched.qg[bpos, t])])
    return buf.getvalue()
