"""Two-stage resilience-planning MILP over (network, scenario set).

Stage 1 picks the investments: one pole class per line (one-hot), backup DG
placements under a budget, and per-line-end sectionalizer additions on top of
any existing devices. Stage 2 replays every scenario: realized damage follows
the chosen pole class, switches may isolate segments, flows obey a linearized
branch-flow model, and demand not served is priced as load shedding. The
deterministic equivalent puts all scenario blocks in one model, weighted by
scenario probability times the annual hazard rate.

Switch semantics, per line end n with device indicator xc_n and open decision
yc_n, follow a fixed truth table: no device means the end cannot interrupt
(end-on = 1), a closed device keeps the end on, an open device turns it off.
A line carries flow only if both ends are on (wo = AND of the ends). yc is a
continuous [0,1] variable: the table rows pin it to 0/1 once xc and the binary
end-state are known, which keeps the binary count down without relaxing
anything.

Damage is not forced to open a line: an un-switched damaged line stays "on",
and the zero-voltage requirement at its endpoints is what propagates the
outage through closed switches. That propagation is exactly what paying for a
sectionalizer interrupts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PlanError, SolverError
from .milp import BINARY, CONTINUOUS, ModelIR, Solution, VarRef
from .network import Network
from .scenarios import Scenario, ScenarioSet, check_dimensions

_INF = float("inf")


@dataclass(frozen=True)
class FormulationOptions:
    """dg_requires_energized_node additionally caps DG output by the node's
    energized flag; off by default, where a DG may inject at a dead node."""

    dg_requires_energized_node: bool = False


@dataclass
class PlanDecision:
    """First-stage investment plan."""

    hardening: list[int]                      # pole option per line, by line index
    dg: list[int]                             # bus ids receiving a DG
    sectionalizers: list[tuple[int, int]]     # (line index, end bus id) additions

    def to_dict(self, net: Network) -> dict:
        return {
            "hardening": {f"{ln.from_bus}-{ln.to_bus}": int(k)
                          for ln, k in zip(net.lines, self.hardening)},
            "dg": [int(b) for b in sorted(self.dg)],
            "sectionalizers": [[f"{net.lines[li].from_bus}-{net.lines[li].to_bus}", int(n)]
                               for li, n in sorted(self.sectionalizers)],
        }

    @classmethod
    def from_dict(cls, doc: dict, net: Network) -> "PlanDecision":
        pair_to_idx = {(ln.from_bus, ln.to_bus): i for i, ln in enumerate(net.lines)}

        def line_index(key: str) -> int:
            i, j = (int(x) for x in key.split("-"))
            if (i, j) in pair_to_idx:
                return pair_to_idx[(i, j)]
            if (j, i) in pair_to_idx:
                return pair_to_idx[(j, i)]
            raise PlanError(f"plan references unknown line {key!r}")

        hardening = [0] * net.n_lines
        for key, k in doc.get("hardening", {}).items():
            hardening[line_index(key)] = int(k)
        sect = [(line_index(key), int(n)) for key, n in doc.get("sectionalizers", [])]
        return cls(hardening=hardening, dg=[int(b) for b in doc.get("dg", [])],
                   sectionalizers=sect)


def baseline_plan(net: Network) -> PlanDecision:
    """Status quo: existing poles everywhere, no DGs, no new sectionalizers."""
    return PlanDecision(hardening=[0] * net.n_lines, dg=[], sectionalizers=[])


def validate_plan(plan: PlanDecision, net: Network) -> None:
    if len(plan.hardening) != net.n_lines:
        raise PlanError(f"plan hardens {len(plan.hardening)} lines, network has {net.n_lines}")
    for li, k in enumerate(plan.hardening):
        if not (0 <= k < net.n_pole_options):
            raise PlanError(f"line {li}: pole option {k} outside catalog")
    if len(set(plan.dg)) != len(plan.dg):
        raise PlanError("duplicate DG bus in plan")
    if len(plan.dg) > net.n_g_max:
        raise PlanError(f"plan places {len(plan.dg)} DGs, budget allows {net.n_g_max}")
    for b in plan.dg:
        if not net.bus(b).dg_candidate:
            raise PlanError(f"bus {b} is not a DG candidate")
    seen = set()
    for li, n in plan.sectionalizers:
        if not (0 <= li < net.n_lines):
            raise PlanError(f"sectionalizer on unknown line index {li}")
        ln = net.lines[li]
        if n not in (ln.from_bus, ln.to_bus):
            raise PlanError(f"bus {n} is not an end of line {ln.from_bus}-{ln.to_bus}")
        if (li, n) in seen:
            raise PlanError(f"duplicate sectionalizer entry ({li}, {n})")
        seen.add((li, n))
        if ln.existing_sectionalizer(n):
            raise PlanError(f"line {ln.from_bus}-{ln.to_bus} end {n} already has a sectionalizer")


@dataclass
class FirstStageVars:
    xh: list[list[VarRef]]                    # [line][pole option]
    xg: dict[int, VarRef]                     # bus id -> placement
    xc1: dict[tuple[int, int], VarRef]        # (line index, end bus id) -> addition
    xc: dict[tuple[int, int], VarRef]         # (line index, end bus id) -> device present


@dataclass
class ScenarioVars:
    u: list[list[VarRef]]                     # [line][t] damage indicator
    cr: list[VarRef]                          # [line] repair cost
    yc: dict[tuple[int, int], list[VarRef]]   # (line, end bus) -> [t] switch-open
    won: dict[tuple[int, int], list[VarRef]]  # (line, end bus) -> [t] end-on state
    wo: list[list[VarRef]]                    # [line][t] line on
    p: list[list[VarRef]]                     # [line][t] active flow kW
    q: list[list[VarRef]]                     # [line][t] reactive flow kVAr
    v: list[list[VarRef]]                     # [bus pos][t] voltage pu
    wm: list[list[VarRef]]                    # [bus pos][t] energized flag
    yr: list[list[VarRef]]                    # [bus pos][t] shed ratio
    pg: dict[int, list[VarRef]]               # bus id -> [t] DG / substation output
    qg: dict[int, list[VarRef]]


@dataclass
class ExtensiveFormMaps:
    net: Network
    sset: ScenarioSet
    first: FirstStageVars
    scenarios: list[ScenarioVars]
    options: FormulationOptions


def _substation_caps(net: Network) -> tuple[float, float]:
    # headroom covering any load realization within the perturbation band
    total_p = sum(b.base_p_load for b in net.buses)
    total_q = sum(b.base_q_load for b in net.buses)
    return 1.5 * total_p, 1.5 * total_q


def build_first_stage(net: Network, model: ModelIR) -> FirstStageVars:
    """Investment variables, one-hot hardening rows, DG budget, device coupling.

    Every line must pick exactly one pole option (option 0 = keep the existing
    pole at zero cost). A line end has a device iff it had one already or the
    plan adds one; additions at ends with existing devices are forced out by
    the coupling row with the binary device indicator.
    """
    xh = [[model.add_variable(f"xh_{ln.from_bus}_{ln.to_bus}_{k}", BINARY)
           for k in range(net.n_pole_options)] for ln in net.lines]
    xg: dict[int, VarRef] = {}
    for b in net.buses:
        ref = model.add_variable(f"xg_{b.id}", BINARY)
        if not b.dg_candidate:
            model.set_bounds(ref, 0.0, 0.0)
        xg[b.id] = ref
    xc1: dict[tuple[int, int], VarRef] = {}
    xc: dict[tuple[int, int], VarRef] = {}
    for li, ln in enumerate(net.lines):
        for n in (ln.from_bus, ln.to_bus):
            xc1[(li, n)] = model.add_variable(f"xc1_{ln.from_bus}_{ln.to_bus}_{n}", BINARY)
    for li, ln in enumerate(net.lines):
        for n in (ln.from_bus, ln.to_bus):
            xc[(li, n)] = model.add_variable(f"xc_{ln.from_bus}_{ln.to_bus}_{n}", BINARY)

    for li, ln in enumerate(net.lines):
        model.add_constraint(f"onehot_{ln.from_bus}_{ln.to_bus}",
                             [(ref, 1.0) for ref in xh[li]], "=", 1.0)
    model.add_constraint("dgbudget", [(ref, 1.0) for ref in xg.values()],
                         "<=", float(net.n_g_max))
    for li, ln in enumerate(net.lines):
        for n in (ln.from_bus, ln.to_bus):
            existing = 1.0 if ln.existing_sectionalizer(n) else 0.0
            model.add_constraint(
                f"seccpl_{ln.from_bus}_{ln.to_bus}_{n}",
                [(xc1[(li, n)], 1.0), (xc[(li, n)], -1.0)], "=", -existing)

    for li, ln in enumerate(net.lines):
        for k in range(net.n_pole_options):
            model.add_objective_term(xh[li][k], ln.hardening_costs[k])
        for n in (ln.from_bus, ln.to_bus):
            model.add_objective_term(xc1[(li, n)], ln.sectionalizer_cost)
    for b in net.buses:
        if b.dg_candidate:
            model.add_objective_term(xg[b.id], b.dg_install_cost)
    return FirstStageVars(xh=xh, xg=xg, xc1=xc1, xc=xc)


def build_second_stage(net: Network, scenario: Scenario, first: FirstStageVars,
                       model: ModelIR, *, s_label: int, dt_hours: float,
                       weight: float, options: FormulationOptions) -> ScenarioVars:
    """One scenario block: damage realization, switch logic, flows, voltages,
    shedding, DG dispatch, and the probability-weighted operating cost terms."""
    n_lines, n_k = net.n_lines, net.n_pole_options
    horizon = scenario.zeta.shape[2]
    sub = net.substation()
    sub_p_cap, sub_q_cap = _substation_caps(net)
    big_m = net.big_m1
    s = s_label

    gen_buses = [b for b in net.buses if b.dg_candidate or b.is_substation]

    # variables, family-major, entity-major, step-minor
    u = [[model.add_variable(f"u_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}", CONTINUOUS, 0.0, 1.0)
          for t in range(horizon)] for ln in net.lines]
    cr = [model.add_variable(f"cr_{ln.from_bus}_{ln.to_bus}_s{s}", CONTINUOUS, 0.0, _INF)
          for ln in net.lines]
    yc: dict[tuple[int, int], list[VarRef]] = {}
    for li, ln in enumerate(net.lines):
        for n in (ln.from_bus, ln.to_bus):
            yc[(li, n)] = [model.add_variable(f"yc_{ln.from_bus}_{ln.to_bus}_{n}_s{s}_t{t}",
                                              CONTINUOUS, 0.0, 1.0) for t in range(horizon)]
    won: dict[tuple[int, int], list[VarRef]] = {}
    for li, ln in enumerate(net.lines):
        for n in (ln.from_bus, ln.to_bus):
            won[(li, n)] = [model.add_variable(f"won_{ln.from_bus}_{ln.to_bus}_{n}_s{s}_t{t}",
                                               BINARY) for t in range(horizon)]
    wo = [[model.add_variable(f"wo_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}", BINARY)
           for t in range(horizon)] for ln in net.lines]
    p = [[model.add_variable(f"P_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}", CONTINUOUS,
                             -ln.p_max, ln.p_max) for t in range(horizon)]
         for ln in net.lines]
    q = [[model.add_variable(f"Q_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}", CONTINUOUS,
                             -ln.q_max, ln.q_max) for t in range(horizon)]
         for ln in net.lines]
    v = [[model.add_variable(f"V_{b.id}_s{s}_t{t}", CONTINUOUS, 0.0, b.v_max)
          for t in range(horizon)] for b in net.buses]
    wm = [[model.add_variable(f"wm_{b.id}_s{s}_t{t}", BINARY) for t in range(horizon)]
          for b in net.buses]
    yr = [[model.add_variable(f"yr_{b.id}_s{s}_t{t}", CONTINUOUS, 0.0, 1.0)
           for t in range(horizon)] for b in net.buses]
    pg: dict[int, list[VarRef]] = {}
    qg: dict[int, list[VarRef]] = {}
    for b in gen_buses:
        cap_p = sub_p_cap if b.is_substation else b.dg_p_max
        pg[b.id] = [model.add_variable(f"Pg_{b.id}_s{s}_t{t}", CONTINUOUS, 0.0, cap_p)
                    for t in range(horizon)]
    for b in gen_buses:
        cap_q = sub_q_cap if b.is_substation else b.dg_q_max
        qg[b.id] = [model.add_variable(f"Qg_{b.id}_s{s}_t{t}", CONTINUOUS, 0.0, cap_q)
                    for t in range(horizon)]

    # damage tracking: the realized status is the zeta row of the chosen pole class
    zeta = scenario.zeta
    for li, ln in enumerate(net.lines):
        for t in range(horizon):
            terms = [(u[li][t], 1.0)]
            terms += [(first.xh[li][k], -float(zeta[li, k, t]))
                      for k in range(n_k) if zeta[li, k, t]]
            model.add_constraint(f"udef_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}", terms, "=", 0.0)
        terms = [(cr[li], 1.0)]
        terms += [(first.xh[li][k], -float(scenario.chi[li, k]))
                  for k in range(n_k) if scenario.chi[li, k]]
        model.add_constraint(f"crdef_{ln.from_bus}_{ln.to_bus}_s{s}", terms, "=", 0.0)

    # switch truth table per end, then line on-state as the AND of its ends
    for li, ln in enumerate(net.lines):
        for n in (ln.from_bus, ln.to_bus):
            for t in range(horizon):
                model.add_constraint(
                    f"ycx_{ln.from_bus}_{ln.to_bus}_{n}_s{s}_t{t}",
                    [(yc[(li, n)][t], 1.0), (first.xc[(li, n)], -1.0)], "<=", 0.0)
                model.add_constraint(
                    f"endon_{ln.from_bus}_{ln.to_bus}_{n}_s{s}_t{t}",
                    [(first.xc[(li, n)], 1.0), (yc[(li, n)][t], 1.0),
                     (won[(li, n)][t], 2.0)], ">=", 2.0)
                model.add_constraint(
                    f"endoff_{ln.from_bus}_{ln.to_bus}_{n}_s{s}_t{t}",
                    [(won[(li, n)][t], 1.0), (yc[(li, n)][t], 1.0)], "<=", 1.0)
        for t in range(horizon):
            for n in (ln.from_bus, ln.to_bus):
                model.add_constraint(
                    f"woand_{ln.from_bus}_{ln.to_bus}_{n}_s{s}_t{t}",
                    [(wo[li][t], 1.0), (won[(li, n)][t], -1.0)], "<=", 0.0)
            model.add_constraint(
                f"woor_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}",
                [(wo[li][t], 1.0), (won[(li, ln.from_bus)][t], -1.0),
                 (won[(li, ln.to_bus)][t], -1.0)], ">=", -1.0)

    # flow gating and the big-M voltage drop envelope
    for li, ln in enumerate(net.lines):
        fpos, tpos = net.bus_position(ln.from_bus), net.bus_position(ln.to_bus)
        a_r, a_x = ln.resistance / net.v0, ln.reactance / net.v0
        for t in range(horizon):
            model.add_constraint(f"pub_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}",
                                 [(p[li][t], 1.0), (wo[li][t], -ln.p_max)], "<=", 0.0)
            model.add_constraint(f"plb_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}",
                                 [(p[li][t], 1.0), (wo[li][t], ln.p_max)], ">=", 0.0)
            model.add_constraint(f"qub_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}",
                                 [(q[li][t], 1.0), (wo[li][t], -ln.q_max)], "<=", 0.0)
            model.add_constraint(f"qlb_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}",
                                 [(q[li][t], 1.0), (wo[li][t], ln.q_max)], ">=", 0.0)
            drop = [(v[fpos][t], 1.0), (v[tpos][t], -1.0),
                    (p[li][t], -a_r), (q[li][t], -a_x)]
            model.add_constraint(f"vdh_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}",
                                 drop + [(wo[li][t], big_m)], "<=", big_m)
            model.add_constraint(f"vdl_{ln.from_bus}_{ln.to_bus}_s{s}_t{t}",
                                 drop + [(wo[li][t], -big_m)], ">=", -big_m)
            for n, pos in ((ln.from_bus, fpos), (ln.to_bus, tpos)):
                model.add_constraint(f"dead_{ln.from_bus}_{ln.to_bus}_{n}_s{s}_t{t}",
                                     [(u[li][t], 1.0), (wm[pos][t], 1.0)], "<=", 1.0)

    # nodal voltage window, forced shedding at de-energized nodes, DG caps, balance
    eps1 = net.epsilon1
    for pos, b in enumerate(net.buses):
        inc = [(li, +1 if net.lines[li].from_bus == b.id else -1)
               for li in range(n_lines)
               if b.id in (net.lines[li].from_bus, net.lines[li].to_bus)]
        for t in range(horizon):
            model.add_constraint(f"vub_{b.id}_s{s}_t{t}",
                                 [(v[pos][t], 1.0), (wm[pos][t], -b.v_max)], "<=", 0.0)
            model.add_constraint(f"vlb_{b.id}_s{s}_t{t}",
                                 [(v[pos][t], 1.0), (wm[pos][t], -b.v_min)], ">=", 0.0)
            if b.is_substation:
                # slack source: voltage pinned to the reference whenever energized
                model.add_constraint(f"vpin_{b.id}_s{s}_t{t}",
                                     [(v[pos][t], 1.0), (wm[pos][t], -net.v0)], "=", 0.0)
            model.add_constraint(f"shed_{b.id}_s{s}_t{t}",
                                 [(yr[pos][t], 1.0), (wm[pos][t], 1.0)], ">=", 1.0)
            if b.id in pg and not b.is_substation:
                model.add_constraint(f"dgp_{b.id}_s{s}_t{t}",
                                     [(pg[b.id][t], 1.0), (first.xg[b.id], -b.dg_p_max)],
                                     "<=", 0.0)
                model.add_constraint(f"dgq_{b.id}_s{s}_t{t}",
                                     [(qg[b.id][t], 1.0), (first.xg[b.id], -b.dg_q_max)],
                                     "<=", 0.0)
                if options.dg_requires_energized_node:
                    model.add_constraint(f"dgpm_{b.id}_s{s}_t{t}",
                                         [(pg[b.id][t], 1.0), (wm[pos][t], -b.dg_p_max)],
                                         "<=", 0.0)
                    model.add_constraint(f"dgqm_{b.id}_s{s}_t{t}",
                                         [(qg[b.id][t], 1.0), (wm[pos][t], -b.dg_q_max)],
                                         "<=", 0.0)
            p_load = float(scenario.p_load[pos, t])
            q_load = float(scenario.q_load[pos, t])
            terms = [(p[li][t], float(sign)) for li, sign in inc]
            terms.append((yr[pos][t], -p_load))
            if b.id in pg:
                terms.append((pg[b.id][t], -1.0))
            if eps1 != 0.0:
                terms.append((v[pos][t], eps1))
            model.add_constraint(f"balp_{b.id}_s{s}_t{t}", terms, "=", -p_load)
            terms = [(q[li][t], float(sign)) for li, sign in inc]
            terms.append((yr[pos][t], -q_load))
            if b.id in qg:
                terms.append((qg[b.id][t], -1.0))
            model.add_constraint(f"balq_{b.id}_s{s}_t{t}", terms, "=", -q_load)

    # probability-weighted operating costs: shedding, DG energy, repairs
    for pos, b in enumerate(net.buses):
        for t in range(horizon):
            model.add_objective_term(
                yr[pos][t], weight * b.shed_cost * float(scenario.p_load[pos, t]) * dt_hours)
        if b.id in pg and b.dg_op_cost > 0.0:
            for t in range(horizon):
                model.add_objective_term(pg[b.id][t], weight * b.dg_op_cost * dt_hours)
    for li in range(n_lines):
        model.add_objective_term(cr[li], weight)

    return ScenarioVars(u=u, cr=cr, yc=yc, won=won, wo=wo, p=p, q=q, v=v,
                        wm=wm, yr=yr, pg=pg, qg=qg)


def build_extensive_form(net: Network, sset: ScenarioSet,
                         options: FormulationOptions | None = None,
                         ) -> tuple[ModelIR, ExtensiveFormMaps]:
    """Deterministic-equivalent model: first stage, then scenario blocks in id
    order; variable order within a block is (family, entity, step). Scenario
    labels in variable names are positional, so two sets differing only in raw
    ids build identical models."""
    options = options or FormulationOptions()
    check_dimensions(net, sset)
    model = ModelIR("gridshield-rod")
    first = build_first_stage(net, model)
    blocks = [build_second_stage(net, sc, first, model, s_label=pos,
                                 dt_hours=sset.dt_hours,
                                 weight=net.w_h * sc.probability, options=options)
              for pos, sc in enumerate(sorted(sset.scenarios, key=lambda sc: sc.id))]
    return model, ExtensiveFormMaps(net=net, sset=sset, first=first,
                                    scenarios=blocks, options=options)


def fix_plan(model: ModelIR, maps: ExtensiveFormMaps, plan: PlanDecision) -> None:
    """Pin every first-stage variable to the plan, turning the model into a pure
    evaluation of that plan's recourse costs."""
    net = maps.net
    validate_plan(plan, net)
    dg = set(plan.dg)
    sect = set(plan.sectionalizers)
    for li in range(net.n_lines):
        for k, ref in enumerate(maps.first.xh[li]):
            val = 1.0 if k == plan.hardening[li] else 0.0
            model.set_bounds(ref, val, val)
    for bus_id, ref in maps.first.xg.items():
        val = 1.0 if bus_id in dg else 0.0
        model.set_bounds(ref, val, val)
    for (li, n), ref in maps.first.xc1.items():
        val = 1.0 if (li, n) in sect else 0.0
        model.set_bounds(ref, val, val)


def _as_binary(value: float, name: str, tol: float = 1e-5) -> int:
    if abs(value - round(value)) > tol:
        raise SolverError(f"integrality violation on {name}: {value!r}")
    return int(round(value))


def extract_plan(solution: Solution, maps: ExtensiveFormMaps) -> PlanDecision:
    if solution.status not in ("optimal", "feasible-gap"):
        raise SolverError(f"cannot extract a plan from status {solution.status!r}")
    vals = solution.values
    net = maps.net
    hardening: list[int] = []
    for li in range(net.n_lines):
        picks = [k for k, ref in enumerate(maps.first.xh[li])
                 if _as_binary(vals[ref.index], ref.name) == 1]
        if len(picks) != 1:
            raise SolverError(
                f"line {li}: expected exactly one pole option, got {picks}")
        hardening.append(picks[0])
    dg = [bus_id for bus_id, ref in maps.first.xg.items()
          if _as_binary(vals[ref.index], ref.name) == 1]
    sect = [(li, n) for (li, n), ref in maps.first.xc1.items()
            if _as_binary(vals[ref.index], ref.name) == 1]
    return PlanDecision(hardening=hardening, dg=sorted(dg), sectionalizers=sorted(sect))


@dataclass
class OperationalSchedule:
    """Second-stage trajectory of one scenario, extracted from a solution."""

    scenario_id: int
    p: np.ndarray        # [line, t] kW
    q: np.ndarray        # [line, t] kVAr
    wo: np.ndarray       # [line, t] line on
    u: np.ndarray        # [line, t] damaged
    cr: np.ndarray       # [line] $
    won: np.ndarray      # [line, end, t] end on (end 0 = from, 1 = to)
    yc: np.ndarray       # [line, end, t] switch open
    xc: np.ndarray       # [line, end] device present (first stage, for audits)
    v: np.ndarray        # [bus, t] pu
    wm: np.ndarray       # [bus, t] energized
    yr: np.ndarray       # [bus, t] shed ratio
    pg: np.ndarray       # [bus, t] kW (0 where no generator)
    qg: np.ndarray       # [bus, t] kVAr


def extract_schedule(solution: Solution, maps: ExtensiveFormMaps, s: int) -> OperationalSchedule:
    """Scenario block s (by position) as dense arrays; binaries and forced-binary
    switch variables are integrality-checked at 1e-5 and rounded."""
    if solution.status not in ("optimal", "feasible-gap"):
        raise SolverError(f"cannot extract a schedule from status {solution.status!r}")
    vals = solution.values
    net = maps.net
    blk = maps.scenarios[s]
    n_l, n_b = net.n_lines, net.n_buses
    horizon = len(blk.wo[0])

    def grid(refs_2d) -> np.ndarray:
        return np.array([[vals[ref.index] for ref in row] for row in refs_2d])

    p, q, vmag = grid(blk.p), grid(blk.q), grid(blk.v)
    yr = grid(blk.yr)
    wo = np.array([[_as_binary(vals[ref.index], ref.name) for ref in row] for row in blk.wo])
    u = np.array([[_as_binary(vals[ref.index], ref.name) for ref in row] for row in blk.u])
    wm = np.array([[_as_binary(vals[ref.index], ref.name) for ref in row] for row in blk.wm])
    cr = np.array([vals[ref.index] for ref in blk.cr])
    won = np.zeros((n_l, 2, horizon), dtype=int)
    yc = np.zeros((n_l, 2, horizon), dtype=int)
    xc = np.zeros((n_l, 2), dtype=int)
    for li, ln in enumerate(net.lines):
        for e, n in enumerate((ln.from_bus, ln.to_bus)):
            xc[li, e] = _as_binary(vals[maps.first.xc[(li, n)].index],
                                   maps.first.xc[(li, n)].name)
            for t in range(horizon):
                won[li, e, t] = _as_binary(vals[blk.won[(li, n)][t].index],
                                           blk.won[(li, n)][t].name)
                yc[li, e, t] = _as_binary(vals[blk.yc[(li, n)][t].index],
                                          blk.yc[(li, n)][t].name)
    pg = np.zeros((n_b, horizon))
    qg = np.zeros((n_b, horizon))
    for bus_id, refs in blk.pg.items():
        pg[net.bus_position(bus_id)] = [vals[ref.index] for ref in refs]
    for bus_id, refs in blk.qg.items():
        qg[net.bus_position(bus_id)] = [vals[ref.index] for ref in refs]
    sid = sorted(maps.sset.scenarios, key=lambda sc: sc.id)[s].id
    return OperationalSchedule(scenario_id=sid, p=p, q=q, wo=wo, u=u, cr=cr,
                               won=won, yc=yc, xc=xc, v=vmag, wm=wm, yr=yr,
                               pg=pg, qg=qg)


@dataclass
class CostBreakdown:
    """Objective decomposition. The four component fields are already weighted
    by hazard rate and scenario probability, so
    total = investment + load_shed + dg_operation + repair
          = investment + expected_second_stage.
    per_scenario carries the raw (unweighted) per-scenario operating costs."""

    investment: float
    load_shed: float
    dg_operation: float
    repair: float
    expected_second_stage: float
    total: float
    per_scenario: list[dict] = field(default_factory=list)
