"""Gym-semantics control environment over the simulator.

Actions are absolute desired RF-frontend states for the N controllable
gNBs, given either as an N-bit vector or (via :func:`decode_action`) as an
integer in [0, 2^N). The observation is a fixed-order vector of 12 KPMs per
gNB plus one scenario-level KPM (total offered demand), length 12*N + 1.

Reward per step:

    r = w_throughput * T / t_max
      - w_energy * P / p_max
      - (c_activation * n_on + c_switch * n_changed * exp(-dt_change / tau))

with T the served downlink throughput of the period, P the instantaneous
power of all base stations (anchor included), n_on the number of cells
switched off->on, n_changed the Hamming distance to the previous action and
dt_change the sim-time since the most recent earlier step whose action
differed from its predecessor. The first change of an episode has no
earlier change to measure from and is charged the full switching cost
(decay factor 1); the change clock starts there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datalake import CellKpmRow, Datalake
from .engine import Simulator
from .scenario import RewardWeights, ScenarioConfig

#: the 12 cell-level KPMs, in observation block order
CELL_KPM_FIELDS = (
    "dl_throughput_mbps",
    "num_attached_ues",
    "prb_utilization",
    "avg_sinr_db",
    "avg_rsrp_dbm",
    "power_w",
    "energy_j_last_period",
    "is_active",
    "ho_in",
    "ho_out",
    "avg_backlog_mbits",
    "qos_violation_ratio",
)


class LifecycleError(RuntimeError):
    """Raised on step() before reset() or after the episode terminated."""


@dataclass
class EnvStep:
    observation: np.ndarray
    reward: float
    terminated: bool
    info: dict


def decode_action(index: int, n: int) -> list[int]:
    """Integer action to N-bit list, LSB first: bits[i] = (index >> i) & 1."""
    if not 0 <= index < (1 << n):
        raise ValueError(f"action index {index} out of range [0, 2^{n})")
    return [(index >> i) & 1 for i in range(n)]


def encode_action(bits) -> int:
    """Inverse of :func:`decode_action`."""
    out = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError("action bits must be 0 or 1")
        out |= int(b) << i
    return out


def observation_from_rows(cell_rows: list[CellKpmRow], n_gnbs: int,
                          total_demand_mbps: float) -> np.ndarray:
    """Assemble the 12*N+1 observation from per-cell rows (gNBs only, in
    cell-id order) plus the scenario-level total offered demand."""
    gnb_rows = sorted(
        (r for r in cell_rows if r.cell_id < n_gnbs), key=lambda r: r.cell_id)
    obs = np.empty(12 * n_gnbs + 1)
    for j, row in enumerate(gnb_rows):
        for k, name in enumerate(CELL_KPM_FIELDS):
            obs[12 * j + k] = float(getattr(row, name))
    obs[-1] = total_demand_mbps
    return obs


def compute_reward(total_throughput_mbps: float, total_power_w: float,
                   prev_action, action, t_since_last_change_s: float,
                   weights: RewardWeights) -> float:
    """Weighted throughput/energy trade-off minus activation and switching
    costs; the switching cost decays exponentially with the time since the
    previous action change, so rapid-fire reconfiguration is the most
    expensive."""
    n_changed = sum(1 for p, a in zip(prev_action, action) if p != a)
    n_on = sum(1 for p, a in zip(prev_action, action) if a and not p)
    decay = math.exp(-t_since_last_change_s / weights.tau_s)
    return (
        weights.w_throughput * (total_throughput_mbps / weights.t_max_mbps)
        - weights.w_energy * (total_power_w / weights.p_max_w)
        - (weights.c_activation * n_on
           + weights.c_switch * n_changed * decay)
    )


class CellOnOffEnv:
    """Episode lifecycle around one :class:`Simulator`.

    reset() returns the initial observation; step() applies the action,
    advances one control period, stores the tick's UE rows in a fresh
    per-episode datalake and returns an :class:`EnvStep`. Strictly serial
    use; run several instances for parallelism.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.sim = Simulator(config)
        self.datalake = Datalake()
        self._ready = False

    @property
    def n_gnbs(self) -> int:
        return self.config.n_gnbs

    @property
    def observation_length(self) -> int:
        return 12 * self.config.n_gnbs + 1

    @property
    def action_count(self) -> int:
        return 1 << self.config.n_gnbs

    def reset(self) -> np.ndarray:
        self.sim.reset()
        self.datalake = Datalake()
        self._prev_bits = (1,) * self.config.n_gnbs
        self._last_change_ms: int | None = None
        self.terminated = False
        self._ready = True
        return self.get_obs()

    def get_obs(self) -> np.ndarray:
        if not self._ready:
            raise LifecycleError("reset required before observations")
        return observation_from_rows(
            self.sim.latest_cell_rows, self.config.n_gnbs,
            self.sim.last_stats.total_demand_mbps)

    def step(self, action) -> EnvStep:
        if not self._ready:
            raise LifecycleError("reset required before step")
        if self.terminated:
            raise LifecycleError("episode terminated; reset required")
        bits = tuple(int(b) for b in action)

        t_now_ms = self.sim.clock.sim_time_ms  # decision epoch, pre-tick
        n_changed = sum(1 for p, a in zip(self._prev_bits, bits) if p != a)
        n_on = sum(1 for p, a in zip(self._prev_bits, bits) if a and not p)
        if self._last_change_ms is None:
            dt_change_s = 0.0
        else:
            dt_change_s = (t_now_ms - self._last_change_ms) / 1000.0
        if n_changed:
            self._last_change_ms = t_now_ms

        self.sim.apply_action(bits)
        ue_rows, cell_rows = self.sim.tick()
        self.datalake.insert_ue_rows(ue_rows)

        stats = self.sim.last_stats
        reward = compute_reward(
            stats.total_served_mbps, stats.total_power_w,
            self._prev_bits, bits, dt_change_s, self.config.reward)
        self._prev_bits = bits
        self.terminated = self.sim.clock.step_index >= self.config.episode_steps

        info = {
            "total_throughput_mbps": stats.total_served_mbps,
            "total_power_w": stats.total_power_w,
            "total_demand_mbps": stats.total_demand_mbps,
            "energy_j": stats.energy_j,
            "n_on": n_on,
            "n_changed": n_changed,
            "t_since_last_change_s": dt_change_s,
            "sim_time_ms": self.sim.clock.sim_time_ms,
            "step": self.sim.clock.step_index,
        }
        return EnvStep(
            observation=observation_from_rows(
                cell_rows, self.config.n_gnbs, stats.total_demand_mbps),
            reward=reward,
            terminated=self.terminated,
            info=info,
        )
