"""Stochastic scenario generation: wind traces, line damage, repair costs, loads.

Every sampling routine is deterministic in (seed, config). Scenario s derives
its streams from child s of the master seed, so generation parallelizes per
scenario and composes: calling the samplers separately with the same master
seed reproduces exactly what generate_scenarios builds.

Damage uses common random numbers across pole options: one uniform draw per
(line, step) is compared against every option's fragility, so a pointwise
weaker curve can never fail where a stronger one survives. Damage is absorbing
within the hazard window; repair is priced afterwards, not simulated in time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionError, GridshieldError
from .network import Network

_STREAM_WIND, _STREAM_DAMAGE, _STREAM_LOAD = 0, 1, 2


@dataclass(frozen=True)
class HazardConfig:
    """Wind event shape: a rise-peak-decay envelope scaled per scenario by one
    lognormal multiplier (mean 1, log-sd sigma), with the realized peak clamped
    into peak_clip."""

    horizon_steps: int = 12
    dt_hours: float = 2.0
    base_wind: float = 10.0
    peak_nominal: float = 35.0
    sigma: float = 0.25
    peak_clip: tuple[float, float] = (20.0, 60.0)


@dataclass(frozen=True)
class ScenarioConfig:
    hazard: HazardConfig = field(default_factory=HazardConfig)
    perturb_range: float = 0.30
    perturb_mode: str = "per_step"  # per_step: i.i.d. per (bus, step); per_event: one draw per bus

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def scenario_config_from_dict(doc: dict) -> ScenarioConfig:
    hz = dict(doc.get("hazard", {}))
    unknown = set(hz) - {f.name for f in HazardConfig.__dataclass_fields__.values()}
    if unknown:
        raise GridshieldError(f"hazard config: unknown key {sorted(unknown)[0]!r}")
    if "peak_clip" in hz:
        hz["peak_clip"] = tuple(hz["peak_clip"])
    unknown = set(doc) - {"hazard", "perturb_range", "perturb_mode"}
    if unknown:
        raise GridshieldError(f"scenario config: unknown key {sorted(unknown)[0]!r}")
    return ScenarioConfig(
        hazard=HazardConfig(**hz),
        perturb_range=float(doc.get("perturb_range", 0.30)),
        perturb_mode=doc.get("perturb_mode", "per_step"),
    )


@dataclass
class HazardProfile:
    horizon_steps: int
    dt_hours: float
    wind_series: np.ndarray  # [scenario, step], m/s


@dataclass
class Scenario:
    id: int
    probability: float
    zeta: np.ndarray    # [line, pole option, step] in {0,1}, absorbing in step
    chi: np.ndarray     # [line, pole option] $, nonzero only where damaged at horizon end
    p_load: np.ndarray  # [bus, step] kW
    q_load: np.ndarray  # [bus, step] kVAr


@dataclass
class ScenarioSet:
    scenarios: list[Scenario]
    seed: int
    config_digest: str
    horizon_steps: int
    dt_hours: float
    bus_ids: list[int]
    line_pairs: list[tuple[int, int]]
    n_pole_options: int

    @property
    def n(self) -> int:
        return len(self.scenarios)


def _scenario_streams(master_seed: int, n: int, stream: int) -> list[np.random.Generator]:
    """One independent generator per scenario for the given sub-stream.

    Scenario s always draws from grandchild `stream` of child s of the master
    seed, no matter which sampler asks first, so the samplers compose and each
    scenario can be produced independently of the others."""
    children = np.random.SeedSequence(master_seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(c.spawn(3)[stream])) for c in children]


def _envelope(cfg: HazardConfig) -> np.ndarray:
    t = np.arange(cfg.horizon_steps)
    shape = np.sin(np.pi * (t + 0.5) / cfg.horizon_steps) ** 2
    shape = shape / shape.max()  # peak exactly at peak_nominal
    return cfg.base_wind + (cfg.peak_nominal - cfg.base_wind) * shape


def sample_wind(rng_seed: int, cfg: HazardConfig, n_scenarios: int) -> HazardProfile:
    """Per-scenario wind series: shared envelope times one clamped lognormal draw."""
    if cfg.horizon_steps < 1:
        raise GridshieldError(f"horizon_steps must be >= 1 (got {cfg.horizon_steps})")
    if cfg.dt_hours <= 0:
        raise GridshieldError(f"dt_hours must be > 0 (got {cfg.dt_hours})")
    env = _envelope(cfg)
    lo, hi = cfg.peak_clip
    series = np.empty((n_scenarios, cfg.horizon_steps))
    for s, rng in enumerate(_scenario_streams(rng_seed, n_scenarios, _STREAM_WIND)):
        z = rng.standard_normal()
        mult = float(np.exp(cfg.sigma * z - 0.5 * cfg.sigma ** 2))
        mult = min(max(mult, lo / cfg.peak_nominal), hi / cfg.peak_nominal)
        series[s] = env * mult
    return HazardProfile(cfg.horizon_steps, cfg.dt_hours, series)


def sample_damage(profile: HazardProfile, net: Network, rng_seed: int) -> np.ndarray:
    """Absorbing damage indicator zeta[scenario, line, option, step].

    One uniform per (line, step) drives all pole options of that line; a line
    under option k is damaged at step t once any earlier-or-equal step drew
    below that option's fragility at the realized wind speed.
    """
    n, horizon = profile.wind_series.shape
    n_lines, n_k = net.n_lines, net.n_pole_options
    curves = [net.curve_for_option(k) for k in range(n_k)]
    zeta = np.zeros((n, n_lines, n_k, horizon), dtype=np.uint8)
    for s, rng in enumerate(_scenario_streams(rng_seed, n, _STREAM_DAMAGE)):
        u = rng.random((n_lines, horizon))
        probs = np.stack([c.probs(profile.wind_series[s]) for c in curves])  # [k, t]
        fail = u[:, None, :] < probs[None, :, :]          # [line, k, t]
        zeta[s] = np.maximum.accumulate(fail, axis=2)     # absorbing in t
    return zeta


def sample_repair_costs(zeta: np.ndarray, catalog) -> np.ndarray:
    """chi[..., line, option] = option repair unit cost iff damaged at horizon end."""
    unit = np.array([opt.repair_unit_cost for opt in catalog])
    return zeta[..., -1] * unit[None, :] if zeta.ndim == 3 \
        else zeta[..., -1] * unit[None, None, :]


def perturb_loads(net: Network, perturb_range: float, rng_seed: int,
                  n_scenarios: int, horizon_steps: int,
                  mode: str = "per_step") -> tuple[np.ndarray, np.ndarray]:
    """Uniform multiplicative load noise in [1-r, 1+r], shared by P and Q so the
    power factor is preserved. Returns ([scenario, bus, step] kW, same kVAr)."""
    if not (0.0 <= perturb_range < 1.0):
        raise GridshieldError(f"perturb_range must be in [0, 1) (got {perturb_range})")
    if mode not in ("per_step", "per_event"):
        raise GridshieldError(f"unknown perturb mode {mode!r}")
    base_p = np.array([b.base_p_load for b in net.buses])
    base_q = np.array([b.base_q_load for b in net.buses])
    n_buses = net.n_buses
    p = np.empty((n_scenarios, n_buses, horizon_steps))
    q = np.empty_like(p)
    for s, rng in enumerate(_scenario_streams(rng_seed, n_scenarios, _STREAM_LOAD)):
        if mode == "per_step":
            mult = rng.uniform(1.0 - perturb_range, 1.0 + perturb_range,
                               size=(n_buses, horizon_steps))
        else:
            mult = np.repeat(rng.uniform(1.0 - perturb_range, 1.0 + perturb_range,
                                         size=(n_buses, 1)), horizon_steps, axis=1)
        p[s] = base_p[:, None] * mult
        q[s] = base_q[:, None] * mult
    return p, q


def generate_scenarios(net: Network, config: ScenarioConfig, n: int, seed: int) -> ScenarioSet:
    """Build n equiprobable scenarios, fully determined by (seed, config, network)."""
    if n < 1:
        raise GridshieldError(f"need at least one scenario (got n={n})")
    hz = config.hazard
    profile = sample_wind(seed, hz, n)
    zeta = sample_damage(profile, net, seed)
    chi = sample_repair_costs(zeta, net.pole_catalog)
    p_load, q_load = perturb_loads(net, config.perturb_range, seed, n,
                                   hz.horizon_steps, config.perturb_mode)
    prob = 1.0 / n
    scenarios = [Scenario(s, prob, zeta[s], chi[s], p_load[s], q_load[s])
                 for s in range(n)]
    return ScenarioSet(
        scenarios=scenarios, seed=seed, config_digest=config.digest(),
        horizon_steps=hz.horizon_steps, dt_hours=hz.dt_hours,
        bus_ids=[b.id for b in net.buses],
        line_pairs=[(ln.from_bus, ln.to_bus) for ln in net.lines],
        n_pole_options=net.n_pole_options,
    )


# -- serialization ----------------------------------------------------------------


def scenario_set_to_dict(sset: ScenarioSet) -> dict:
    return {
        "seed": sset.seed,
        "config_digest": sset.config_digest,
        "horizon_steps": sset.horizon_steps,
        "dt_hours": sset.dt_hours,
        "bus_ids": list(sset.bus_ids),
        "line_pairs": [list(p) for p in sset.line_pairs],
        "n_pole_options": sset.n_pole_options,
        "scenarios": [{
            "id": sc.id,
            "probability": sc.probability,
            "zeta": sc.zeta.astype(int).tolist(),
            "chi": sc.chi.tolist(),
            "p_load": sc.p_load.tolist(),
            "q_load": sc.q_load.tolist(),
        } for sc in sset.scenarios],
    }


def save_scenario_set(sset: ScenarioSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_set_to_dict(sset), fh, separators=(",", ":"))
        fh.write("\n")


def load_scenario_set(path) -> ScenarioSet:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        scenarios = [Scenario(
            id=sc["id"], probability=float(sc["probability"]),
            zeta=np.asarray(sc["zeta"], dtype=np.uint8),
            chi=np.asarray(sc["chi"], dtype=float),
            p_load=np.asarray(sc["p_load"], dtype=float),
            q_load=np.asarray(sc["q_load"], dtype=float),
        ) for sc in doc["scenarios"]]
        sset = ScenarioSet(
            scenarios=scenarios, seed=doc["seed"], config_digest=doc["config_digest"],
            horizon_steps=doc["horizon_steps"], dt_hours=doc["dt_hours"],
            bus_ids=list(doc["bus_ids"]),
            line_pairs=[tuple(p) for p in doc["line_pairs"]],
            n_pole_options=doc["n_pole_options"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise GridshieldError(f"{path}: malformed scenario file ({exc})") from None
    total = sum(sc.probability for sc in sset.scenarios)
    if abs(total - 1.0) > 1e-12:
        raise GridshieldError(f"{path}: scenario probabilities sum to {total!r}, not 1")
    return sset


def check_dimensions(net: Network, sset: ScenarioSet) -> None:
    """Raise DimensionError unless the scenario set was generated for this network."""
    if sset.bus_ids != [b.id for b in net.buses]:
        raise DimensionError("scenario set bus ids do not match the network")
    if sset.line_pairs != [(ln.from_bus, ln.to_bus) for ln in net.lines]:
        raise DimensionError("scenario set line pairs do not match the network")
    if sset.n_pole_options != net.n_pole_options:
        raise DimensionError(
            f"scenario set has {sset.n_pole_options} pole options, "
            f"network catalog has {net.n_pole_options}")
    horizon = sset.horizon_steps
    for sc in sset.scenarios:
        if sc.zeta.shape != (net.n_lines, net.n_pole_options, horizon):
            raise DimensionError(f"scenario {sc.id}: zeta shape {sc.zeta.shape} mismatch")
        if sc.chi.shape != (net.n_lines, net.n_pole_options):
            raise DimensionError(f"scenario {sc.id}: chi shape {sc.chi.shape} mismatch")
        if sc.p_load.shape != (net.n_buses, horizon) or sc.q_load.shape != (net.n_buses, horizon):
            raise DimensionError(f"scenario {sc.id}: load shape mismatch")
