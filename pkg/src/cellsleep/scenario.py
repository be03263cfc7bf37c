"""Scenario construction and validation.

A scenario fully describes one simulation: cell layout, UE population,
radio parameters, traffic mix, power model and reward weights. Configs are
frozen dataclasses, immutable after construction and safe to share across
threads. The on-disk format is a JSON document mirroring the field names
(snake_case, SI units).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

Point = tuple[float, float]
# axis-aligned rectangle: (xmin, ymin, xmax, ymax), meters
Bounds = tuple[float, float, float, float]


@dataclass(frozen=True)
class TrafficConfig:
    """Downlink traffic mix: a CBR (UDP-like) share and elastic (TCP-like) rest."""

    cbr_fraction: float = 0.5
    cbr_rates_mbps: tuple[float, ...] = (0.75, 1.5, 3.0)
    elastic_cap_mbps: float = 20.0


@dataclass(frozen=True)
class EnergyParams:
    """Linear base-station power model parameters (EARTH-style macro class)."""

    p0_w: float = 130.0       # idle power while active
    delta_p: float = 4.7      # load slope, dimensionless
    p_max_tx_w: float = 20.0  # max transmit power
    p_sleep_w: float = 75.0   # RF frontend off


@dataclass(frozen=True)
class RewardWeights:
    w_throughput: float = 1.0
    w_energy: float = 0.5
    c_activation: float = 0.05
    c_switch: float = 0.05
    tau_s: float = 1.0            # switching-penalty decay time constant
    t_max_mbps: float = 500.0     # throughput normalizer
    p_max_w: float = 1792.0       # power normalizer


@dataclass(frozen=True)
class ScenarioConfig:
    n_gnbs: int
    gnb_positions: tuple[Point, ...]
    lte_anchor_position: Point
    inter_site_distance_m: float
    n_ues: int
    area_bounds: Bounds
    carrier_freq_ghz: float = 3.5
    lte_freq_ghz: float = 0.85
    bandwidth_hz: float = 20e6
    lte_bandwidth_hz: float = 10e6
    gnb_tx_power_dbm: float = 30.0
    lte_tx_power_dbm: float = 43.0
    gnb_height_m: float = 10.0
    ue_height_m: float = 1.5
    noise_figure_db: float = 7.0
    control_period_ms: int = 100
    episode_steps: int = 600
    min_rsrp_dbm: float = -110.0
    hysteresis_db: float = 3.0
    max_spectral_efficiency: float = 7.4
    seed: int = 0
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    energy: EnergyParams = field(default_factory=EnergyParams)
    reward: RewardWeights = field(default_factory=RewardWeights)


def default_power_normalizer(n_gnbs: int, energy: EnergyParams) -> float:
    """Peak instantaneous network power: every cell (gNBs plus anchor) at full load."""
    return (n_gnbs + 1) * (energy.p0_w + energy.delta_p * energy.p_max_tx_w)


def build_default_scenario(seed: int) -> ScenarioConfig:
    """Demo scenario: LTE anchor at the origin, one co-located gNB plus a
    hexagonal ring of six gNBs 1700 m out, 63 UEs dropped uniformly in a
    5.1 km square, 100 ms control period.

    Pure function of ``seed``: the topology is fixed, only the seed field
    (and therefore UE placement at reset) varies.
    """
    isd = 1700.0
    positions: list[Point] = [(0.0, 0.0)]
    for k in range(6):
        ang = math.radians(60.0 * k)
        positions.append((isd * math.cos(ang), isd * math.sin(ang)))
    energy = EnergyParams()
    return ScenarioConfig(
        n_gnbs=7,
        gnb_positions=tuple(positions),
        lte_anchor_position=(0.0, 0.0),
        inter_site_distance_m=isd,
        n_ues=63,
        area_bounds=(-2550.0, -2550.0, 2550.0, 2550.0),
        seed=int(seed),
        reward=RewardWeights(p_max_w=default_power_normalizer(7, energy)),
        energy=energy,
    )


def _inside(p: Point, bounds: Bounds) -> bool:
    xmin, ymin, xmax, ymax = bounds
    return xmin <= p[0] <= xmax and ymin <= p[1] <= ymax


def validate(config: ScenarioConfig) -> list[str]:
    """Return a list of invariant violations, one message per offending field.

    An empty list means the config is usable. Violations are data, not
    faults; callers decide whether to raise.
    """
    v: list[str] = []
    if config.n_gnbs < 1:
        v.append("n_gnbs must be >= 1")
    if config.n_ues < 1:
        v.append("n_ues must be >= 1")
    if config.control_period_ms <= 0:
        v.append("control_period_ms must be > 0")
    if config.episode_steps <= 0:
        v.append("episode_steps must be > 0")
    if len(config.gnb_positions) != config.n_gnbs:
        v.append("gnb_positions length must equal n_gnbs")
    xmin, ymin, xmax, ymax = config.area_bounds
    if not (xmin < xmax and ymin < ymax):
        v.append("area_bounds must span a non-empty rectangle")
    else:
        for i, p in enumerate(config.gnb_positions):
            if not _inside(p, config.area_bounds):
                v.append(f"gnb_positions[{i}] lies outside area_bounds")
        if not _inside(config.lte_anchor_position, config.area_bounds):
            v.append("lte_anchor_position lies outside area_bounds")
    if config.bandwidth_hz <= 0:
        v.append("bandwidth_hz must be > 0")
    if config.lte_bandwidth_hz <= 0:
        v.append("lte_bandwidth_hz must be > 0")
    if config.max_spectral_efficiency <= 0:
        v.append("max_spectral_efficiency must be > 0")
    t = config.traffic
    if not 0.0 <= t.cbr_fraction <= 1.0:
        v.append("traffic.cbr_fraction must be in [0, 1]")
    if any(r <= 0 for r in t.cbr_rates_mbps) or not t.cbr_rates_mbps:
        v.append("traffic.cbr_rates_mbps must be non-empty and all > 0")
    if t.elastic_cap_mbps <= 0:
        v.append("traffic.elastic_cap_mbps must be > 0")
    e = config.energy
    if min(e.p0_w, e.delta_p, e.p_max_tx_w, e.p_sleep_w) < 0:
        v.append("energy parameters must be >= 0")
    if not e.p_sleep_w < e.p0_w:
        v.append("energy.p_sleep_w must be < energy.p0_w")
    r = config.reward
    if min(r.w_throughput, r.w_energy, r.c_activation, r.c_switch) < 0:
        v.append("reward weights must be >= 0")
    if r.tau_s <= 0:
        v.append("reward.tau_s must be > 0")
    if r.t_max_mbps <= 0 or r.p_max_w <= 0:
        v.append("reward normalizers must be > 0")
    return v


def scenario_to_dict(config: ScenarioConfig) -> dict:
    return asdict(config)


def scenario_from_dict(data: dict) -> ScenarioConfig:
    d = dict(data)
    d["gnb_positions"] = tuple(tuple(p) for p in d["gnb_positions"])
    d["lte_anchor_position"] = tuple(d["lte_anchor_position"])
    d["area_bounds"] = tuple(d["area_bounds"])
    if isinstance(d.get("traffic"), dict):
        t = dict(d["traffic"])
        t["cbr_rates_mbps"] = tuple(t["cbr_rates_mbps"])
        d["traffic"] = TrafficConfig(**t)
    if isinstance(d.get("energy"), dict):
        d["energy"] = EnergyParams(**d["energy"])
    if isinstance(d.get("reward"), dict):
        d["reward"] = RewardWeights(**d["reward"])
    return ScenarioConfig(**d)


def save_scenario(config: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_dict(config), f, indent=2)
        f.write("\n")


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as f:
        return scenario_from_dict(json.load(f))
