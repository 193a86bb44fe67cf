"""Distribution network data model: ingestion, validation, serialization.

Unit conventions, fixed by the JSON schema: voltages in per-unit, powers in
kW / kVAr, money in $, time in hours. Line resistance/reactance are stored as
per-unit voltage drop per kW (i.e. already divided by the kW power base), so
``(resistance * p_flow + reactance * q_flow) / v0`` is a per-unit voltage drop.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import NetworkError

_INF = float("inf")


@dataclass
class FragilityCurve:
    """Piecewise-linear map from wind speed (m/s) to per-step failure probability."""

    id: str
    breakpoints: list[tuple[float, float]]

    def prob(self, wind_speed: float) -> float:
        xs = [w for w, _ in self.breakpoints]
        ys = [p for _, p in self.breakpoints]
        return float(np.interp(wind_speed, xs, ys))

    def probs(self, wind_speeds) -> np.ndarray:
        xs = [w for w, _ in self.breakpoints]
        ys = [p for _, p in self.breakpoints]
        return np.interp(np.asarray(wind_speeds, dtype=float), xs, ys)


@dataclass
class Bus:
    id: int
    v_min: float
    v_max: float
    base_p_load: float
    base_q_load: float
    shed_cost: float
    is_substation: bool = False
    dg_candidate: bool = False
    dg_p_max: float = 0.0
    dg_q_max: float = 0.0
    dg_op_cost: float = 0.0
    dg_install_cost: float = 0.0


@dataclass
class Line:
    from_bus: int
    to_bus: int
    resistance: float
    reactance: float
    p_max: float
    q_max: float
    sectionalizer_cost: float
    hardening_costs: list[float]
    existing_sectionalizer_from: bool = False
    existing_sectionalizer_to: bool = False

    def existing_sectionalizer(self, end_bus: int) -> bool:
        if end_bus == self.from_bus:
            return self.existing_sectionalizer_from
        if end_bus == self.to_bus:
            return self.existing_sectionalizer_to
        raise NetworkError(f"bus {end_bus} is not an endpoint of line "
                           f"{self.from_bus}-{self.to_bus}")


@dataclass
class PoleOption:
    index: int
    label: str
    fragility: str  # FragilityCurve id
    repair_unit_cost: float


@dataclass
class Network:
    buses: list[Bus]
    lines: list[Line]
    pole_catalog: list[PoleOption]
    fragility_curves: dict[str, FragilityCurve]
    v0: float
    n_g_max: int
    w_h: float
    epsilon1: float = 0.0
    big_m1: float | None = None
    _bus_index: dict[int, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._bus_index = {b.id: i for i, b in enumerate(self.buses)}
        if self.big_m1 is None:
            self.big_m1 = derive_big_m1(self)

    def bus(self, bus_id: int) -> Bus:
        try:
            return self.buses[self._bus_index[bus_id]]
        except KeyError:
            raise NetworkError(f"unknown bus id {bus_id}") from None

    def bus_position(self, bus_id: int) -> int:
        try:
            return self._bus_index[bus_id]
        except KeyError:
            raise NetworkError(f"unknown bus id {bus_id}") from None

    def substation(self) -> Bus:
        subs = [b for b in self.buses if b.is_substation]
        if len(subs) != 1:
            raise NetworkError(f"expected exactly one substation, found {len(subs)}")
        return subs[0]

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def n_pole_options(self) -> int:
        return len(self.pole_catalog)

    def curve_for_option(self, k: int) -> FragilityCurve:
        opt = self.pole_catalog[k]
        try:
            return self.fragility_curves[opt.fragility]
        except KeyError:
            raise NetworkError(
                f"pole option {k} references missing fragility curve {opt.fragility!r}"
            ) from None


def derive_big_m1(net: Network) -> float:
    """Smallest constant that releases the voltage-drop envelope of an open line
    for any in-bounds flow: max voltage ceiling plus the largest possible drop."""
    worst_drop = max((ln.resistance * ln.p_max + ln.reactance * ln.q_max) / net.v0
                     for ln in net.lines)
    return max(b.v_max for b in net.buses) + worst_drop


def incident_lines(net: Network, bus_id: int) -> list[tuple[int, int]]:
    """Lines touching a bus as (line index, orientation): +1 leaving (from end),
    -1 entering (to end). Flow sign convention: positive flow runs from_bus -> to_bus."""
    net.bus(bus_id)  # raises on unknown id
    out: list[tuple[int, int]] = []
    for li, ln in enumerate(net.lines):
        if ln.from_bus == bus_id:
            out.append((li, +1))
        elif ln.to_bus == bus_id:
            out.append((li, -1))
    return out


# -- JSON schema ---------------------------------------------------------------

_BUS_REQUIRED = {"id", "v_min", "v_max", "base_p_load", "base_q_load", "shed_cost"}
_BUS_OPTIONAL = {"is_substation": False, "dg_candidate": False, "dg_p_max": 0.0,
                 "dg_q_max": 0.0, "dg_op_cost": 0.0, "dg_install_cost": 0.0}
_LINE_REQUIRED = {"from_bus", "to_bus", "resistance", "reactance", "p_max", "q_max",
                  "sectionalizer_cost", "hardening_costs"}
_LINE_OPTIONAL = {"existing_sectionalizer_from": False, "existing_sectionalizer_to": False}
_POLE_REQUIRED = {"index", "label", "fragility", "repair_unit_cost"}
_PARAMS_REQUIRED = {"v0", "n_g_max", "w_h", "fragility_curves"}
_PARAMS_OPTIONAL = {"epsilon1": 0.0, "big_m1": None}


def _need_number(obj, key, where, allow_none=False):
    v = obj[key]
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise NetworkError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _need_int(obj, key, where):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise NetworkError(f"{where}.{key}: expected an integer, got {v!r}")
    return v


def _need_bool(obj, key, where):
    v = obj[key]
    if not isinstance(v, bool):
        raise NetworkError(f"{where}.{key}: expected a boolean, got {v!r}")
    return v


def _check_keys(obj, required, optional, where):
    if not isinstance(obj, dict):
        raise NetworkError(f"{where}: expected an object")
    unknown = set(obj) - required - set(optional)
    if unknown:
        raise NetworkError(f"{where}: unknown key {sorted(unknown)[0]!r}")
    missing = required - set(obj)
    if missing:
        raise NetworkError(f"{where}: missing key {sorted(missing)[0]!r}")


def parse_network(path) -> Network:
    """Load and structurally resolve a network JSON file.

    Raises NetworkError on schema violations (with field + location), unresolved
    bus references and duplicate lines. Deeper invariant checks live in
    validate_network, which reports instead of raising.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"{path}: not valid JSON ({exc})") from None
    return network_from_dict(doc)


def network_from_dict(doc: dict) -> Network:
    _check_keys(doc, {"buses", "lines", "pole_catalog", "params"}, {}, "top level")
    params = doc["params"]
    _check_keys(params, _PARAMS_REQUIRED, _PARAMS_OPTIONAL, "params")

    curves: dict[str, FragilityCurve] = {}
    raw_curves = params["fragility_curves"]
    if not isinstance(raw_curves, list):
        raise NetworkError("params.fragility_curves: expected a list")
    for ci, rc in enumerate(raw_curves):
        where = f"params.fragility_curves[{ci}]"
        _check_keys(rc, {"id", "breakpoints"}, {}, where)
        cid = rc["id"]
        if not isinstance(cid, str):
            raise NetworkError(f"{where}.id: expected a string")
        if cid in curves:
            raise NetworkError(f"{where}: duplicate curve id {cid!r}")
        bps = rc["breakpoints"]
        if (not isinstance(bps, list) or not bps
                or not all(isinstance(p, list) and len(p) == 2 for p in bps)):
            raise NetworkError(f"{where}.breakpoints: expected a non-empty list of [wind, prob] pairs")
        curves[cid] = FragilityCurve(cid, [(float(w), float(p)) for w, p in bps])

    buses: list[Bus] = []
    seen_bus: set[int] = set()
    for bi, rb in enumerate(doc["buses"]):
        where = f"buses[{bi}]"
        _check_keys(rb, _BUS_REQUIRED, _BUS_OPTIONAL, where)
        bid = _need_int(rb, "id", where)
        if bid in seen_bus:
            raise NetworkError(f"{where}: duplicate bus id {bid}")
        seen_bus.add(bid)
        buses.append(Bus(
            id=bid,
            v_min=_need_number(rb, "v_min", where),
            v_max=_need_number(rb, "v_max", where),
            base_p_load=_need_number(rb, "base_p_load", where),
            base_q_load=_need_number(rb, "base_q_load", where),
            shed_cost=_need_number(rb, "shed_cost", where),
            is_substation=_need_bool(rb, "is_substation", where) if "is_substation" in rb else False,
            dg_candidate=_need_bool(rb, "dg_candidate", where) if "dg_candidate" in rb else False,
            dg_p_max=_need_number(rb, "dg_p_max", where) if "dg_p_max" in rb else 0.0,
            dg_q_max=_need_number(rb, "dg_q_max", where) if "dg_q_max" in rb else 0.0,
            dg_op_cost=_need_number(rb, "dg_op_cost", where) if "dg_op_cost" in rb else 0.0,
            dg_install_cost=_need_number(rb, "dg_install_cost", where) if "dg_install_cost" in rb else 0.0,
        ))

    lines: list[Line] = []
    seen_pair: set[tuple[int, int]] = set()
    for li, rl in enumerate(doc["lines"]):
        where = f"lines[{li}]"
        _check_keys(rl, _LINE_REQUIRED, _LINE_OPTIONAL, where)
        fb, tb = _need_int(rl, "from_bus", where), _need_int(rl, "to_bus", where)
        for end, key in ((fb, "from_bus"), (tb, "to_bus")):
            if end not in seen_bus:
                raise NetworkError(f"{where}.{key}: unresolved bus reference {end}")
        pair = (min(fb, tb), max(fb, tb))
        if pair in seen_pair:
            raise NetworkError(f"{where}: duplicate line between buses {fb} and {tb}")
        seen_pair.add(pair)
        hc = rl["hardening_costs"]
        if not isinstance(hc, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in hc):
            raise NetworkError(f"{where}.hardening_costs: expected a list of numbers")
        lines.append(Line(
            from_bus=fb, to_bus=tb,
            resistance=_need_number(rl, "resistance", where),
            reactance=_need_number(rl, "reactance", where),
            p_max=_need_number(rl, "p_max", where),
            q_max=_need_number(rl, "q_max", where),
            sectionalizer_cost=_need_number(rl, "sectionalizer_cost", where),
            hardening_costs=[float(x) for x in hc],
            existing_sectionalizer_from=_need_bool(rl, "existing_sectionalizer_from", where)
            if "existing_sectionalizer_from" in rl else False,
            existing_sectionalizer_to=_need_bool(rl, "existing_sectionalizer_to", where)
            if "existing_sectionalizer_to" in rl else False,
        ))

    catalog: list[PoleOption] = []
    for ki, rk in enumerate(doc["pole_catalog"]):
        where = f"pole_catalog[{ki}]"
        _check_keys(rk, _POLE_REQUIRED, {}, where)
        if not isinstance(rk["label"], str) or not isinstance(rk["fragility"], str):
            raise NetworkError(f"{where}: label and fragility must be strings")
        catalog.append(PoleOption(
            index=_need_int(rk, "index", where),
            label=rk["label"],
            fragility=rk["fragility"],
            repair_unit_cost=_need_number(rk, "repair_unit_cost", where),
        ))

    return Network(
        buses=buses, lines=lines, pole_catalog=catalog, fragility_curves=curves,
        v0=_need_number(params, "v0", "params"),
        n_g_max=_need_int(params, "n_g_max", "params"),
        w_h=_need_number(params, "w_h", "params"),
        epsilon1=_need_number(params, "epsilon1", "params") if "epsilon1" in params else 0.0,
        big_m1=_need_number(params, "big_m1", "params", allow_none=True)
        if "big_m1" in params else None,
    )


def network_to_dict(net: Network) -> dict:
    return {
        "buses": [{
            "id": b.id, "is_substation": b.is_substation, "v_min": b.v_min,
            "v_max": b.v_max, "dg_candidate": b.dg_candidate, "dg_p_max": b.dg_p_max,
            "dg_q_max": b.dg_q_max, "base_p_load": b.base_p_load,
            "base_q_load": b.base_q_load, "shed_cost": b.shed_cost,
            "dg_op_cost": b.dg_op_cost, "dg_install_cost": b.dg_install_cost,
        } for b in net.buses],
        "lines": [{
            "from_bus": ln.from_bus, "to_bus": ln.to_bus, "resistance": ln.resistance,
            "reactance": ln.reactance, "p_max": ln.p_max, "q_max": ln.q_max,
            "existing_sectionalizer_from": ln.existing_sectionalizer_from,
            "existing_sectionalizer_to": ln.existing_sectionalizer_to,
            "sectionalizer_cost": ln.sectionalizer_cost,
            "hardening_costs": ln.hardening_costs,
        } for ln in net.lines],
        "pole_catalog": [{
            "index": k.index, "label": k.label, "fragility": k.fragility,
            "repair_unit_cost": k.repair_unit_cost,
        } for k in net.pole_catalog],
        "params": {
            "v0": net.v0, "n_g_max": net.n_g_max, "w_h": net.w_h,
            "epsilon1": net.epsilon1, "big_m1": net.big_m1,
            "fragility_curves": [
                {"id": c.id, "breakpoints": [[w, p] for w, p in c.breakpoints]}
                for c in net.fragility_curves.values()
            ],
        },
    }


def save_network(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, indent=1)
        fh.write("\n")


# -- validation ------------------------------------------------------------------


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_network(net: Network) -> ValidationReport:
    """Check every structural invariant; reports, never raises.

    Errors are violations that make the planning model ill-posed; warnings flag
    suspicious but usable data (e.g. a pole option that is both cheaper and
    stronger than another, which merely makes the pricier one useless).
    """
    rep = ValidationReport()
    err, warn = rep.errors.append, rep.warnings.append

    for b in net.buses:
        if not (0.0 < b.v_min < b.v_max):
            err(f"bus {b.id}: voltage bounds must satisfy 0 < v_min < v_max "
                f"(got [{b.v_min}, {b.v_max}])")
        if b.dg_candidate and (b.dg_p_max <= 0.0 or b.dg_q_max <= 0.0):
            err(f"bus {b.id}: DG candidate needs dg_p_max and dg_q_max > 0")
        if b.base_p_load < 0.0 or b.base_q_load < 0.0:
            err(f"bus {b.id}: negative base load")
        if b.shed_cost < 0.0 or b.dg_op_cost < 0.0 or b.dg_install_cost < 0.0:
            err(f"bus {b.id}: negative cost")

    subs = [b.id for b in net.buses if b.is_substation]
    if len(subs) != 1:
        err(f"exactly one substation required, found {len(subs)} "
            f"({subs or 'none'})")

    known = {b.id for b in net.buses}
    seen_pair: set[tuple[int, int]] = set()
    n_k = net.n_pole_options
    for li, ln in enumerate(net.lines):
        tag = f"line {ln.from_bus}-{ln.to_bus}"
        if ln.from_bus == ln.to_bus:
            err(f"{tag}: self-loop")
        for end in (ln.from_bus, ln.to_bus):
            if end not in known:
                err(f"{tag}: unresolved bus reference {end}")
        pair = (min(ln.from_bus, ln.to_bus), max(ln.from_bus, ln.to_bus))
        if pair in seen_pair:
            err(f"{tag}: duplicate line")
        seen_pair.add(pair)
        if ln.resistance < 0.0 or ln.reactance < 0.0:
            err(f"{tag}: negative impedance")
        if ln.p_max <= 0.0 or ln.q_max <= 0.0:
            err(f"{tag}: flow limits must be positive")
        if len(ln.hardening_costs) != n_k:
            err(f"{tag}: hardening_costs has {len(ln.hardening_costs)} entries, "
                f"catalog has {n_k} options")
        else:
            if any(c < 0.0 for c in ln.hardening_costs):
                err(f"{tag}: negative hardening cost")
            if ln.hardening_costs[0] != 0.0:
                err(f"{tag}: option 0 is the existing pole and must cost 0")
        if ln.sectionalizer_cost < 0.0:
            err(f"{tag}: negative sectionalizer cost")

    for k, opt in enumerate(net.pole_catalog):
        if opt.index != k:
            err(f"pole_catalog[{k}]: index {opt.index} out of order "
                "(must be contiguous from 0)")
        if opt.repair_unit_cost < 0.0:
            err(f"pole_catalog[{k}]: negative repair_unit_cost")
        if opt.fragility not in net.fragility_curves:
            err(f"pole_catalog[{k}]: unresolved fragility curve {opt.fragility!r}")

    for cid, curve in net.fragility_curves.items():
        winds = [w for w, _ in curve.breakpoints]
        probs = [p for _, p in curve.breakpoints]
        if any(b <= a for a, b in zip(winds, winds[1:])):
            err(f"fragility curve {cid!r}: wind speeds must be strictly increasing")
        if any(p < 0.0 or p > 1.0 for p in probs):
            err(f"fragility curve {cid!r}: probabilities outside [0, 1]")
        if any(b < a for a, b in zip(probs, probs[1:])):
            err(f"fragility curve {cid!r}: probabilities must be non-decreasing in wind")

    if net.n_g_max < 0:
        err(f"n_g_max must be >= 0 (got {net.n_g_max})")
    if net.w_h <= 0.0:
        err(f"w_h must be > 0 (got {net.w_h})")
    if net.buses:
        vlo, vhi = min(b.v_min for b in net.buses), max(b.v_max for b in net.buses)
        if not (vlo <= net.v0 <= vhi):
            err(f"v0={net.v0} outside the bus voltage band [{vlo}, {vhi}]")

    # connectivity from the substation, ignoring switch states
    if len(subs) == 1 and not rep.errors:
        adj: dict[int, list[int]] = {b.id: [] for b in net.buses}
        for ln in net.lines:
            adj[ln.from_bus].append(ln.to_bus)
            adj[ln.to_bus].append(ln.from_bus)
        seen = {subs[0]}
        queue = deque([subs[0]])
        while queue:
            for nxt in adj[queue.popleft()]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        for b in net.buses:
            if b.id not in seen:
                err(f"bus {b.id}: unreachable from the substation")

    # catalog sanity: paying more should not buy a weaker pole
    resolvable = all(o.fragility in net.fragility_curves for o in net.pole_catalog)
    if resolvable and net.lines and all(
            len(ln.hardening_costs) == n_k for ln in net.lines):
        mean_cost = [float(np.mean([ln.hardening_costs[k] for ln in net.lines]))
                     for k in range(n_k)]
        order = sorted(range(n_k), key=lambda k: (mean_cost[k], k))
        grid = sorted({w for o in net.pole_catalog
                       for w, _ in net.fragility_curves[o.fragility].breakpoints})
        for cheap, costly in zip(order, order[1:]):
            pc = net.fragility_curves[net.pole_catalog[cheap].fragility].probs(grid)
            pk = net.fragility_curves[net.pole_catalog[costly].fragility].probs(grid)
            if np.any(pk > pc + 1e-12):
                warn(f"pole option {costly} costs more (mean ${mean_cost[costly]:g}) than "
                     f"option {cheap} (mean ${mean_cost[cheap]:g}) but is more fragile "
                     "at some wind speeds")
    return rep
