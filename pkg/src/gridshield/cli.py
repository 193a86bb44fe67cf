"""Command-line pipeline: generate -> solve -> evaluate, plus oracle and validate.

Exit codes: 0 success, 1 domain error (bad data, solver failure), 2 usage error
(bad flags, missing files). Every command writes a run.json manifest recording
seeds, config digests, solver identity and wall time, so a run can be repeated
bit-for-bit (solver outputs may differ only within the MIP gap).

Configuration precedence: command-line flags > --config file > built-in
defaults. The built-in cost defaults follow the bundled fixtures ($14/kWh
shedding, $8/kWh DG energy, $4000 repairs, 2-hour steps); hazard-rate and
DG-budget defaults are plain assumptions and live in the network file.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .errors import GridshieldError
from .formulation import (FormulationOptions, PlanDecision, baseline_plan,
                          build_extensive_form, extract_plan)
from .network import parse_network, validate_network
from .oracle import enumerate_optimal
from .report import compare_rod, cost_breakdown, emit_report, evaluate_plan, schedule_csv
from .scenarios import (ScenarioConfig, generate_scenarios, load_scenario_set,
                        save_scenario_set, scenario_config_from_dict)
from .solver import SolverConfig, solve


class UsageError(Exception):
    pass


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    return p


def _load_config(args) -> dict:
    if getattr(args, "config", None):
        doc = json.loads(_require_file(args.config, "config").read_text())
        if not isinstance(doc, dict):
            raise UsageError(f"config {args.config}: expected a JSON object")
        return doc
    return {}


def _scenario_config(args, cfg_doc: dict) -> ScenarioConfig:
    cfg = scenario_config_from_dict(
        {k: v for k, v in cfg_doc.items()
         if k in ("hazard", "perturb_range", "perturb_mode")})
    if getattr(args, "perturb", None) is not None:
        cfg = ScenarioConfig(hazard=cfg.hazard, perturb_range=args.perturb,
                             perturb_mode=cfg.perturb_mode)
    return cfg


def _solver_config(args, cfg_doc: dict) -> SolverConfig:
    doc = dict(cfg_doc.get("solver", {}))
    if getattr(args, "solver", None):
        doc["solver_id"] = args.solver
    if getattr(args, "solver_path", None):
        doc["executable"] = args.solver_path
    if getattr(args, "gap", None) is not None:
        doc["mip_gap"] = args.gap
    if getattr(args, "time_limit", None) is not None:
        doc["time_limit_s"] = args.time_limit
    if getattr(args, "keep_files", False):
        doc["keep_files"] = True
    return SolverConfig(**doc)


def _formulation_options(cfg_doc: dict) -> FormulationOptions:
    return FormulationOptions(
        dg_requires_energized_node=bool(cfg_doc.get("dg_requires_energized_node", False)))


def _write_manifest(out: Path, command: str, t0: float, **fields) -> None:
    doc = {"command": command, **fields, "wall_seconds": round(time.monotonic() - t0, 3)}
    (out / "run.json").write_text(json.dumps(doc, indent=1) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    t0 = time.monotonic()
    net = parse_network(_require_file(args.network, "network"))
    _fail_on_invalid(net)
    cfg_doc = _load_config(args)
    cfg = _scenario_config(args, cfg_doc)
    sset = generate_scenarios(net, cfg, args.scenarios, args.seed)
    out = _out_dir(args)
    save_scenario_set(sset, out / "scenarios.json")
    _write_manifest(out, "generate", t0, network=str(args.network),
                    seed=args.seed, n_scenarios=args.scenarios,
                    config_digest=sset.config_digest)
    print(f"wrote {out / 'scenarios.json'} ({sset.n} scenarios, seed {sset.seed})")
    return 0


def _fail_on_invalid(net) -> None:
    rep = validate_network(net)
    for warning in rep.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if not rep.ok:
        raise GridshieldError("invalid network: " + "; ".join(rep.errors))


def cmd_solve(args) -> int:
    t0 = time.monotonic()
    net = parse_network(_require_file(args.network, "network"))
    _fail_on_invalid(net)
    sset = load_scenario_set(_require_file(args.scenarios, "scenario"))
    cfg_doc = _load_config(args)
    solver_cfg = _solver_config(args, cfg_doc)
    model, maps = build_extensive_form(net, sset, _formulation_options(cfg_doc))
    out = _out_dir(args)
    if args.keep_files:
        model.write_mps(out / "model.mps")
    sol = solve(model, solver_cfg)
    if sol.status not in ("optimal", "feasible-gap"):
        raise GridshieldError(f"solve ended with status {sol.status}: {sol.message}")
    plan = extract_plan(sol, maps)
    bd = cost_breakdown(sol, maps, net, sset)
    (out / "plan.json").write_text(json.dumps(plan.to_dict(net), indent=1) + "\n")
    (out / "solution.csv").write_text(schedule_csv(maps, sol))
    _write_manifest(out, "solve", t0, network=str(args.network),
                    scenarios=str(args.scenarios), seed=sset.seed,
                    config_digest=sset.config_digest,
                    solver={"id": sol.solver_id, "mip_gap": solver_cfg.mip_gap,
                            "time_limit_s": solver_cfg.time_limit_s},
                    status=sol.status, objective=sol.objective_value, gap=sol.gap)
    print(f"status {sol.status}  objective ${sol.objective_value:,.2f}  "
          f"(investment ${bd.investment:,.2f}, expected recourse "
          f"${bd.expected_second_stage:,.2f})")
    print(f"wrote {out / 'plan.json'}, {out / 'solution.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    t0 = time.monotonic()
    net = parse_network(_require_file(args.network, "network"))
    _fail_on_invalid(net)
    sset = load_scenario_set(_require_file(args.scenarios, "scenario"))
    cfg_doc = _load_config(args)
    solver_cfg = _solver_config(args, cfg_doc)
    options = _formulation_options(cfg_doc)
    out = _out_dir(args)
    if args.plan is not None:
        if args.plan == "baseline":
            plan = baseline_plan(net)
        else:
            plan = PlanDecision.from_dict(
                json.loads(_require_file(args.plan, "plan").read_text()), net)
        sol, maps, bd = evaluate_plan(net, sset, plan, solver_cfg, options)
        doc = {"objective": bd.total, "investment": bd.investment,
               "load_shed": bd.load_shed, "dg_operation": bd.dg_operation,
               "repair": bd.repair, "per_scenario": bd.per_scenario}
        (out / "evaluation.json").write_text(json.dumps(doc, indent=1) + "\n")
        _write_manifest(out, "evaluate", t0, plan=str(args.plan),
                        objective=bd.total, seed=sset.seed,
                        config_digest=sset.config_digest,
                        solver={"id": solver_cfg.solver_id, "mip_gap": solver_cfg.mip_gap})
        print(f"plan objective ${bd.total:,.2f} "
              f"(shed ${bd.load_shed:,.2f}, dg ${bd.dg_operation:,.2f}, "
              f"repair ${bd.repair:,.2f})")
        return 0
    report = compare_rod(net, sset, solver_cfg, options)
    files = emit_report(report, out)
    _write_manifest(out, "evaluate", t0, seed=sset.seed,
                    config_digest=sset.config_digest,
                    solver={"id": solver_cfg.solver_id, "mip_gap": solver_cfg.mip_gap},
                    total_with=report.total_with, total_without=report.total_without,
                    mean_shed_savings_pct=report.mean_savings_pct)
    print(f"total with investment ${report.total_with:,.2f}  "
          f"baseline ${report.total_without:,.2f}  "
          f"mean shed savings {report.mean_savings_pct:.1f}%")
    print("wrote " + ", ".join(str(f) for f in files))
    return 0


def cmd_oracle(args) -> int:
    t0 = time.monotonic()
    net = parse_network(_require_file(args.fixture, "fixture"))
    _fail_on_invalid(net)
    cfg_doc = _load_config(args)
    cfg = _scenario_config(args, cfg_doc)
    solver_cfg = _solver_config(args, cfg_doc)
    sset = generate_scenarios(net, cfg, args.scenarios, args.seed)
    oracle_obj, oracle_plan, stats = enumerate_optimal(
        net, sset, limit=args.limit, solver_cfg=SolverConfig(mip_gap=1e-9),
        options=_formulation_options(cfg_doc))
    model, maps = build_extensive_form(net, sset, _formulation_options(cfg_doc))
    sol = solve(model, solver_cfg)
    rel = abs(sol.objective_value - oracle_obj) / max(1.0, abs(oracle_obj))
    tol = max(1e-6, solver_cfg.mip_gap)
    verdict = "MATCH" if rel <= tol else "MISMATCH"
    out = _out_dir(args)
    doc = {"oracle_objective": oracle_obj, "milp_objective": sol.objective_value,
           "relative_difference": rel, "tolerance": tol, "verdict": verdict,
           "leaves": stats.n_leaves, "lp_solves": stats.n_lp_solves,
           "plan": oracle_plan.to_dict(net)}
    (out / "oracle.json").write_text(json.dumps(doc, indent=1) + "\n")
    _write_manifest(out, "oracle", t0, fixture=str(args.fixture), seed=args.seed,
                    verdict=verdict)
    print(f"oracle ${oracle_obj:,.6f}  milp ${sol.objective_value:,.6f}  "
          f"rel diff {rel:.2e}  -> {verdict}")
    if verdict == "MISMATCH":
        raise GridshieldError("oracle and MILP objectives disagree")
    return 0


def cmd_validate(args) -> int:
    net = parse_network(_require_file(args.network, "network"))
    rep = validate_network(net)
    for e in rep.errors:
        print(f"error: {e}")
    for w in rep.warnings:
        print(f"warning: {w}")
    print(f"{len(rep.errors)} errors, {len(rep.warnings)} warnings")
    if not rep.ok:
        raise GridshieldError("network validation failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gridshield",
        description="Resilience investment planning for power distribution networks")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scenarios_file=False):
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--config", help="JSON config file")
        if scenarios_file:
            p.add_argument("--scenarios", required=True, help="scenario JSON file")

    g = sub.add_parser("generate", help="sample a scenario set")
    g.add_argument("--network", required=True)
    g.add_argument("--scenarios", type=int, default=10, help="number of scenarios")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--perturb", type=float, help="load perturbation range, e.g. 0.30")
    common(g)
    g.set_defaults(func=cmd_generate)

    def solver_flags(p):
        p.add_argument("--solver", help="solver id: scipy (default), cbc, highs")
        p.add_argument("--solver-path", help="explicit solver executable")
        p.add_argument("--gap", type=float, help="relative MIP gap")
        p.add_argument("--time-limit", type=float, help="seconds")
        p.add_argument("--keep-files", action="store_true",
                       help="retain model/solver files")

    s = sub.add_parser("solve", help="solve the two-stage investment model")
    s.add_argument("--network", required=True)
    solver_flags(s)
    common(s, scenarios_file=True)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("evaluate", help="compare optimized vs baseline plans")
    e.add_argument("--network", required=True)
    e.add_argument("--plan", help="plan JSON file, or 'baseline'")
    solver_flags(e)
    common(e, scenarios_file=True)
    e.set_defaults(func=cmd_evaluate)

    o = sub.add_parser("oracle", help="brute-force check on a tiny fixture")
    o.add_argument("--fixture", required=True, help="tiny network JSON file")
    o.add_argument("--scenarios", type=int, default=2)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--perturb", type=float)
    o.add_argument("--limit", type=int, default=24, help="max free binaries")
    solver_flags(o)
    common(o)
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("validate", help="check a network file")
    v.add_argument("--network", required=True)
    common(v)
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        ap.print_usage(sys.stderr)
        return 2
    except GridshieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
