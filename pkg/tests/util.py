"""Shared helpers: fixture paths, hand-built scenario sets, schedule invariants."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from gridshield.formulation import OperationalSchedule
from gridshield.network import Network
from gridshield.scenarios import Scenario, ScenarioSet, sample_repair_costs

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

# admissible (device, switch-open, end-on) triples per line end; anything with
# an open switch and no device must be infeasible, never merely suboptimal
TABLE1_TRIPLES = {(0, 0, 1), (1, 0, 1), (1, 1, 0)}


def manual_set(net: Network, zeta_list: list[np.ndarray], dt_hours: float = 2.0,
               loads: tuple[np.ndarray, np.ndarray] | None = None) -> ScenarioSet:
    """Scenario set with hand-written damage tensors and base (or given) loads."""
    n = len(zeta_list)
    horizon = zeta_list[0].shape[2]
    base_p = np.array([b.base_p_load for b in net.buses])
    base_q = np.array([b.base_q_load for b in net.buses])
    scenarios = []
    for s, zeta in enumerate(zeta_list):
        zeta = np.asarray(zeta, dtype=np.uint8)
        chi = sample_repair_costs(zeta, net.pole_catalog)
        if loads is None:
            p = np.repeat(base_p[:, None], horizon, axis=1)
            q = np.repeat(base_q[:, None], horizon, axis=1)
        else:
            p, q = loads
        scenarios.append(Scenario(id=s, probability=1.0 / n, zeta=zeta, chi=chi,
                                  p_load=p, q_load=q))
    return ScenarioSet(scenarios=scenarios, seed=0, config_digest="manual",
                       horizon_steps=horizon, dt_hours=dt_hours,
                       bus_ids=[b.id for b in net.buses],
                       line_pairs=[(ln.from_bus, ln.to_bus) for ln in net.lines],
                       n_pole_options=net.n_pole_options)


def zero_hazard_set(net: Network, n: int, horizon: int, dt_hours: float = 2.0) -> ScenarioSet:
    shape = (net.n_lines, net.n_pole_options, horizon)
    return manual_set(net, [np.zeros(shape, dtype=np.uint8) for _ in range(n)],
                      dt_hours=dt_hours)


def assert_table1(sched: OperationalSchedule) -> None:
    n_lines, _, horizon = sched.won.shape
    for li in range(n_lines):
        for e in range(2):
            for t in range(horizon):
                triple = (int(sched.xc[li, e]), int(sched.yc[li, e, t]),
                          int(sched.won[li, e, t]))
                assert triple in TABLE1_TRIPLES, (
                    f"line {li} end {e} t {t}: switch triple {triple} not admissible")
        for t in range(horizon):
            ends_on = int(sched.won[li, 0, t]) and int(sched.won[li, 1, t])
            assert int(sched.wo[li, t]) == int(ends_on), (
                f"line {li} t {t}: wo={sched.wo[li, t]} but ends {sched.won[li, :, t]}")


def assert_dead_node_coupling(net: Network, sched: OperationalSchedule) -> None:
    n_buses, horizon = sched.v.shape
    for b in range(n_buses):
        for t in range(horizon):
            if sched.wm[b, t] == 0:
                assert sched.v[b, t] <= 1e-8, (
                    f"bus pos {b} t {t}: de-energized but V={sched.v[b, t]}")
                assert sched.yr[b, t] >= 1 - 1e-6, (
                    f"bus pos {b} t {t}: de-energized but yr={sched.yr[b, t]}")
    for li, ln in enumerate(net.lines):
        fpos, tpos = net.bus_position(ln.from_bus), net.bus_position(ln.to_bus)
        for t in range(horizon):
            if sched.u[li, t] == 1:
                assert sched.wm[fpos, t] == 0 and sched.wm[tpos, t] == 0, (
                    f"line {li} damaged at t {t} but an endpoint is energized")


def assert_schedule_invariants(net: Network, sched: OperationalSchedule) -> None:
    assert_table1(sched)
    assert_dead_node_coupling(net, sched)
