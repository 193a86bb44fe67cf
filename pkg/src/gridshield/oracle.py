"""Brute-force ground truth for tiny instances.

Enumerates every assignment of the model's free binaries (bounds 0 < 1) and
solves the continuous restriction of each through the regular solver driver, so
the oracle exercises the same model, writer and extraction path as a real MIP
solve while never trusting a branch-and-bound tree. Interval propagation over
the model's own rows prunes assignments that cannot be completed, which is what
keeps full enumeration tractable up to the binary limit.

Ties on the objective (1e-9 relative) keep the first assignment found; the
search branches value 0 before 1 on ascending variable index, so the winner is
the depth-first-lexicographically smallest optimal bitstring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OracleError
from .formulation import (FormulationOptions, PlanDecision,
                          build_extensive_form, extract_plan)
from .milp import BINARY, ModelIR, Solution
from .network import Network
from .scenarios import ScenarioSet
from .solver import SolverConfig, solve

_EPS = 1e-9


@dataclass
class OracleResult:
    objective: float
    plan: PlanDecision
    n_leaves: int
    n_lp_solves: int
    n_nodes: int


class _Propagator:
    """Interval propagation over the model rows (a tiny presolver).

    tighten() narrows [lo, hi] to a fixpoint using row activity bounds, snaps
    binaries to {0,1} when a fractional bound forces them, and returns False
    when some row or bound becomes unsatisfiable. Derived bounds are valid
    implications of the rows, so applying them never cuts off a feasible point.
    """

    def __init__(self, model: ModelIR):
        self.rows = [(np.array(idxs, dtype=int), np.array(coefs), sense, rhs)
                     for _, idxs, coefs, sense, rhs in model.rows]
        self.is_binary = np.array([k == BINARY for k in model.var_kinds])
        self.var_rows: list[list[int]] = [[] for _ in range(model.num_vars)]
        for r, (idxs, _, _, _) in enumerate(self.rows):
            for j in idxs:
                self.var_rows[j].append(r)

    def tighten(self, lo: np.ndarray, hi: np.ndarray,
                touched: list[int] | None = None) -> bool:
        # inf bounds legitimately produce inf/nan intermediates; the isfinite
        # guards below skip those inferences, so silence numpy's warnings
        with np.errstate(invalid="ignore", divide="ignore"):
            return self._tighten(lo, hi, touched)

    def _tighten(self, lo: np.ndarray, hi: np.ndarray,
                 touched: list[int] | None) -> bool:
        if touched is None:
            queue = set(range(len(self.rows)))
        else:
            queue = {r for j in touched for r in self.var_rows[j]}
        while queue:
            r = queue.pop()
            idxs, coefs, sense, rhs = self.rows[r]
            if idxs.size == 0:
                if (sense == "<=" and 0.0 > rhs + _EPS) or \
                   (sense == ">=" and 0.0 < rhs - _EPS) or \
                   (sense == "=" and abs(rhs) > _EPS):
                    return False
                continue
            l_, h_ = lo[idxs], hi[idxs]
            pos = coefs > 0
            min_terms = np.where(pos, coefs * l_, coefs * h_)
            max_terms = np.where(pos, coefs * h_, coefs * l_)
            min_act, max_act = min_terms.sum(), max_terms.sum()
            if sense in ("<=", "=") and min_act > rhs + _EPS:
                return False
            if sense in (">=", "=") and max_act < rhs - _EPS:
                return False
            for pos_k in range(idxs.size):
                j, c = idxs[pos_k], coefs[pos_k]
                changed = False
                if sense in ("<=", "="):
                    # c*x <= rhs - (min activity of the others)
                    resid = min_act - min_terms[pos_k]
                    if math.isfinite(resid):
                        limit = (rhs - resid) / c
                        if c > 0 and limit < hi[j] - _EPS:
                            hi[j] = limit
                            changed = True
                        elif c < 0 and limit > lo[j] + _EPS:
                            lo[j] = limit
                            changed = True
                if sense in (">=", "="):
                    # c*x >= rhs - (max activity of the others)
                    resid = max_act - max_terms[pos_k]
                    if math.isfinite(resid):
                        limit = (rhs - resid) / c
                        if c > 0 and limit > lo[j] + _EPS:
                            lo[j] = limit
                            changed = True
                        elif c < 0 and limit < hi[j] - _EPS:
                            hi[j] = limit
                            changed = True
                if changed:
                    if self.is_binary[j]:
                        if lo[j] > _EPS:
                            lo[j] = 1.0
                        if hi[j] < 1.0 - _EPS:
                            hi[j] = 0.0
                    if lo[j] > hi[j] + _EPS:
                        return False
                    queue.update(self.var_rows[j])
                    # re-read activities next time this row is popped
            # recompute lazily: push the row back if any of its vars changed
        return True


def enumerate_optimal(net: Network, scenario_set: ScenarioSet, limit: int = 24,
                      solver_cfg: SolverConfig | None = None,
                      options: FormulationOptions | None = None,
                      ) -> tuple[float, PlanDecision, OracleResult]:
    """Optimal objective and plan by exhaustive binary enumeration.

    Refuses instances with more than `limit` free binaries (default 24).
    Infeasible assignments are skipped; returns the best objective, its plan,
    and enumeration statistics.
    """
    solver_cfg = solver_cfg or SolverConfig(mip_gap=1e-9)
    model, maps = build_extensive_form(net, scenario_set, options)
    free = [i for i in model.binary_indices() if model.lower[i] < model.upper[i]]
    if len(free) > limit:
        raise OracleError(
            f"instance has {len(free)} free binaries, oracle limit is {limit}")

    prop = _Propagator(model)
    base_lo, base_hi = model.bounds_arrays()
    best: dict = {"obj": math.inf, "values": None}
    stats = OracleResult(objective=math.inf, plan=None, n_leaves=0,
                         n_lp_solves=0, n_nodes=0)

    saved_bounds = (list(model.lower), list(model.upper))

    def solve_leaf(lo: np.ndarray, hi: np.ndarray) -> None:
        stats.n_leaves += 1
        # fix binaries only; continuous vars keep their original bounds
        for i in free:
            model.lower[i] = lo[i]
            model.upper[i] = hi[i]
        for i in model.binary_indices():
            if lo[i] == hi[i]:
                model.lower[i] = lo[i]
                model.upper[i] = hi[i]
        stats.n_lp_solves += 1
        sol = solve(model, solver_cfg)
        if sol.status not in ("optimal", "feasible-gap"):
            return
        if sol.objective_value < best["obj"] * (1 - _EPS) - _EPS:
            best["obj"] = sol.objective_value
            best["values"] = sol.values

    def descend(lo: np.ndarray, hi: np.ndarray, touched: list[int]) -> None:
        stats.n_nodes += 1
        lo, hi = lo.copy(), hi.copy()
        if not prop.tighten(lo, hi, touched if stats.n_nodes > 1 else None):
            return
        undecided = [i for i in free if lo[i] < hi[i]]
        if not undecided:
            solve_leaf(lo, hi)
            return
        j = undecided[0]
        for val in (0.0, 1.0):
            lo2, hi2 = lo.copy(), hi.copy()
            lo2[j] = hi2[j] = val
            descend(lo2, hi2, [j])

    try:
        descend(base_lo, base_hi, [])
    finally:
        model.lower, model.upper = saved_bounds

    if best["values"] is None:
        raise OracleError("no feasible binary assignment found")

    # package the winning assignment so the plan comes out the standard path
    sol = Solution(status="optimal", objective_value=best["obj"],
                   values=best["values"], gap=0.0, solve_seconds=0.0,
                   solver_id="oracle")
    plan = extract_plan(sol, maps)
    stats.objective = best["obj"]
    stats.plan = plan
    return best["obj"], plan, stats
