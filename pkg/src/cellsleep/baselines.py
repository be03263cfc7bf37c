"""Heuristic controllers and the episode runner used for comparisons."""

from __future__ import annotations

import csv
import json
import math
import socket
from dataclasses import dataclass, field, replace

import numpy as np

from .env import CellOnOffEnv
from .rng import stream_rng
from .scenario import ScenarioConfig

ALL_ON = "all_on"
RANDOM = "random"
THRESHOLD = "threshold"

STEP_CSV_FIELDS = (
    "step", "sim_time_ms", "reward", "tput_mbps", "power_w", "energy_j",
    "n_changed", "n_on",
)


class AbortedEpisodeError(Exception):
    """An external controller failed mid-episode; carries the partial report."""

    def __init__(self, message: str, report: "EpisodeReport"):
        super().__init__(message)
        self.report = report


@dataclass
class StepRecord:
    step: int
    sim_time_ms: int
    reward: float
    tput_mbps: float
    power_w: float
    energy_j: float
    n_changed: int
    n_on: int


@dataclass
class EpisodeReport:
    controller: str
    seed: int
    energy_j: float
    mean_tput_mbps: float
    switches: int
    reward_sum: float
    steps: list[StepRecord] = field(default_factory=list, repr=False)
    aborted: bool = False


class AllOnController:
    name = ALL_ON

    def __init__(self, n_gnbs: int):
        self._bits = [1] * n_gnbs

    def decide(self, obs) -> list[int]:
        return list(self._bits)


class RandomController:
    name = RANDOM

    def __init__(self, n_gnbs: int, seed: int):
        self._n = n_gnbs
        self._rng = stream_rng(seed, "controller:random")

    def decide(self, obs) -> list[int]:
        return [int(b) for b in self._rng.integers(0, 2, self._n)]


@dataclass
class ThresholdState:
    """Mutable bookkeeping carried between threshold-policy calls."""

    bits: list[int]
    last_change_step: list[int]
    step: int = 0


@dataclass(frozen=True)
class ThresholdParams:
    u_low: int = 2            # switch a cell off below this many attached UEs
    theta_high: float = 0.8   # PRB-utilization trigger
    hold_steps: int = 10      # min steps between one cell's own changes

    def __post_init__(self):
        if self.hold_steps < 1:
            raise ValueError("hold_steps must be >= 1")
        if not 0.0 < self.theta_high <= 1.0:
            raise ValueError("theta_high must be in (0, 1]")


def threshold_policy(obs, params: ThresholdParams, history: ThresholdState,
                     neighbors: list[list[int]],
                     distances: np.ndarray) -> list[int]:
    """One decision of the load-threshold heuristic.

    A cell goes OFF when it serves fewer than ``u_low`` UEs and every active
    neighbor that would absorb them sits at or below ``theta_high``
    utilization. When any active cell exceeds ``theta_high``, the OFF cell
    nearest to it is brought back (ties to the lowest cell id). Each cell
    waits ``hold_steps`` between its own changes.
    """
    n = len(history.bits)
    attached = [obs[12 * i + 1] for i in range(n)]
    prb = [obs[12 * i + 2] for i in range(n)]
    bits = list(history.bits)
    step = history.step

    def may_change(i: int) -> bool:
        return step - history.last_change_step[i] >= params.hold_steps

    changed: set[int] = set()
    for i in range(n):
        if bits[i] == 1 and may_change(i) and attached[i] < params.u_low:
            absorbers = [j for j in neighbors[i] if bits[j] == 1]
            if all(prb[j] <= params.theta_high for j in absorbers):
                bits[i] = 0
                changed.add(i)

    overloaded = [i for i in range(n)
                  if history.bits[i] == 1 and prb[i] > params.theta_high]
    for i in overloaded:
        candidates = [j for j in range(n)
                      if bits[j] == 0 and j not in changed and may_change(j)]
        if not candidates:
            continue
        best = min(candidates, key=lambda j: (distances[i, j], j))
        bits[best] = 1
        changed.add(best)

    for i in changed:
        history.last_change_step[i] = step
    history.bits = bits
    history.step = step + 1
    return list(bits)


class ThresholdController:
    name = THRESHOLD

    # neighbors = cells within this multiple of the inter-site distance
    NEIGHBOR_RADIUS_FACTOR = 1.5

    def __init__(self, config: ScenarioConfig, params: ThresholdParams | None = None):
        self.params = params or ThresholdParams()
        xy = np.asarray(config.gnb_positions, dtype=float)
        diff = xy[:, None, :] - xy[None, :, :]
        self._distances = np.hypot(diff[:, :, 0], diff[:, :, 1])
        radius = self.NEIGHBOR_RADIUS_FACTOR * config.inter_site_distance_m
        n = config.n_gnbs
        self._neighbors = [
            [j for j in range(n) if j != i and self._distances[i, j] <= radius]
            for i in range(n)
        ]
        self._state = ThresholdState(
            bits=[1] * n, last_change_step=[-self.params.hold_steps] * n)

    def decide(self, obs) -> list[int]:
        return threshold_policy(
            obs, self.params, self._state, self._neighbors, self._distances)


class ExternalController:
    """Queries an external agent over a line-delimited JSON socket: sends
    one OBS message per step and expects one ACT message with action bits.
    Any transport or format failure aborts the episode."""

    name = "external"

    def __init__(self, host: str, port: int, n_gnbs: int, timeout: float = 30.0):
        self._host, self._port, self._n = host, int(port), n_gnbs
        self._timeout = timeout
        self._file = None

    def _connect(self):
        sock = socket.create_connection(
            (self._host, self._port), timeout=self._timeout)
        self._file = sock.makefile("rw", encoding="utf-8", newline="\n")

    def decide(self, obs) -> list[int]:
        if self._file is None:
            self._connect()
        self._file.write(json.dumps(
            {"type": "OBS", "observation": [float(x) for x in obs]},
            separators=(",", ":")) + "\n")
        self._file.flush()
        line = self._file.readline()
        if not line:
            raise ConnectionError("agent closed the connection")
        msg = json.loads(line)
        action = msg.get("action")
        if (not isinstance(action, list) or len(action) != self._n
                or any(b not in (0, 1) for b in action)):
            raise ValueError(f"agent sent an invalid action: {action!r}")
        return [int(b) for b in action]


def make_controller(kind: str, config: ScenarioConfig, seed: int):
    """Build a fresh single-episode controller from its CLI spec string."""
    if kind == ALL_ON:
        return AllOnController(config.n_gnbs)
    if kind == RANDOM:
        return RandomController(config.n_gnbs, seed)
    if kind == THRESHOLD:
        return ThresholdController(config)
    if kind.startswith("external:"):
        _, host, port = kind.split(":")
        return ExternalController(host, int(port), config.n_gnbs)
    raise ValueError(f"unknown controller kind: {kind!r}")


def run_episode(config: ScenarioConfig, controller, seed: int,
                steps_csv_path: str | None = None) -> EpisodeReport:
    """Run one full episode with ``controller`` (an instance or a kind
    string) on ``config`` re-seeded with ``seed``.

    Report totals are exact fsum/integer aggregates of the per-step records,
    so they can be audited against the exported per-step CSV.
    """
    cfg = replace(config, seed=int(seed))
    if isinstance(controller, str):
        controller = make_controller(controller, cfg, seed)
    env = CellOnOffEnv(cfg)
    obs = env.reset()
    records: list[StepRecord] = []
    aborted = False
    abort_reason = None
    for k in range(cfg.episode_steps):
        try:
            bits = controller.decide(obs)
        except (OSError, ValueError, ConnectionError) as exc:
            aborted = True
            abort_reason = f"controller failed at step {k}: {exc}"
            break
        result = env.step(bits)
        info = result.info
        records.append(StepRecord(
            step=k,
            sim_time_ms=info["sim_time_ms"],
            reward=result.reward,
            tput_mbps=info["total_throughput_mbps"],
            power_w=info["total_power_w"],
            energy_j=info["energy_j"],
            n_changed=info["n_changed"],
            n_on=info["n_on"],
        ))
        obs = result.observation
    report = summarize(getattr(controller, "name", str(controller)),
                       seed, records, aborted=aborted)
    if steps_csv_path is not None:
        write_steps_csv(records, steps_csv_path)
    if aborted:
        raise AbortedEpisodeError(abort_reason, report)
    return report


def summarize(controller_name: str, seed: int, records: list[StepRecord],
              aborted: bool = False) -> EpisodeReport:
    n = len(records)
    return EpisodeReport(
        controller=controller_name,
        seed=seed,
        energy_j=math.fsum(r.energy_j for r in records),
        mean_tput_mbps=math.fsum(r.tput_mbps for r in records) / n if n else 0.0,
        switches=sum(r.n_changed for r in records),
        reward_sum=math.fsum(r.reward for r in records),
        steps=records,
        aborted=aborted,
    )


def write_steps_csv(records: list[StepRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(STEP_CSV_FIELDS)
        for r in records:
            writer.writerow([getattr(r, name) for name in STEP_CSV_FIELDS])


def read_steps_csv(path: str) -> list[StepRecord]:
    out: list[StepRecord] = []
    with open(path, encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            out.append(StepRecord(
                step=int(row["step"]),
                sim_time_ms=int(row["sim_time_ms"]),
                reward=float(row["reward"]),
                tput_mbps=float(row["tput_mbps"]),
                power_w=float(row["power_w"]),
                energy_j=float(row["energy_j"]),
                n_changed=int(row["n_changed"]),
                n_on=int(row["n_on"]),
            ))
    return out
