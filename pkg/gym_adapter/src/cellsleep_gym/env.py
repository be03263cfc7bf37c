"""Gym-API environment backed by a remote simulator session.

The adapter never simulates anything itself: every reset/step is one
request/response exchange on the wire, and the values it returns are the
server's own, bit-exact after JSON round-trip. Two action exposures are
offered: DISCRETE (one integer in [0, 2^N), expanded LSB-first to bits
before sending) and MULTIBINARY (the N bits directly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .client import ProtocolError, WireClient
from .spaces import Box, Discrete, MultiBinary

DISCRETE = "discrete"
MULTIBINARY = "multibinary"


@dataclass(frozen=True)
class RemoteEnvConfig:
    host: str = "127.0.0.1"
    port: int = 9500
    scenario_path: str | None = None
    action_mode: str = DISCRETE
    seed: int | None = None


def index_to_bits(index: int, n: int) -> list[int]:
    """LSB-first expansion, mirroring the simulator's action decoding."""
    if not 0 <= index < (1 << n):
        raise ValueError(f"action index {index} out of range [0, 2^{n})")
    return [(index >> i) & 1 for i in range(n)]


class RemoteCellOnOffEnv:
    """reset()/step() follow the 5-tuple gym API; observations are float64
    vectors of length 12*N+1. One instance per socket; not shareable across
    concurrent trainers."""

    metadata = {"render_modes": []}
    render_mode = None
    spec = None

    def __init__(self, config: RemoteEnvConfig | None = None, **kw):
        self._config = config or RemoteEnvConfig(**kw)
        if self._config.action_mode not in (DISCRETE, MULTIBINARY):
            raise ValueError(f"unknown action mode {self._config.action_mode!r}")
        self._scenario = None
        if self._config.scenario_path is not None:
            with open(self._config.scenario_path, encoding="utf-8") as f:
                self._scenario = json.load(f)
        self._client: WireClient | None = None
        self._seed = self._config.seed
        self._connect()
        self._needs_reset = True
        self._terminated = False

        n = self.n_gnbs
        self.observation_space = Box(-np.inf, np.inf, (12 * n + 1,), np.float64)
        if self._config.action_mode == DISCRETE:
            self.action_space = Discrete(1 << n)
        else:
            self.action_space = MultiBinary(n)

    def _connect(self) -> None:
        if self._client is not None:
            self._client.close()
        self._client = WireClient(self._config.host, self._config.port)
        self._client.hello()
        scenario = self._scenario
        if scenario is not None and self._seed is not None:
            scenario = dict(scenario, seed=int(self._seed))
        info = self._client.init(scenario=scenario, seed=self._seed)
        self.n_gnbs = info["n_gnbs"]
        self.observation_length = info["observation_length"]
        self.episode_steps = info["episode_steps"]

    # --------------------------------------------------------------- gym API

    def reset(self, *, seed: int | None = None, options=None):
        if seed is not None and seed != self._seed:
            # the wire grammar admits one INIT per session, so reseeding
            # means a fresh session with the seed baked into the scenario
            self._seed = int(seed)
            self._connect()
        obs = np.asarray(self._client.reset(), dtype=np.float64)
        self._needs_reset = False
        self._terminated = False
        return obs, {}

    def step(self, action):
        if self._needs_reset:
            raise RuntimeError("call reset() before step()")
        if self._terminated:
            raise RuntimeError("episode terminated; call reset()")
        bits = self._action_bits(action)
        try:
            resp = self._client.step(bits)
        except ProtocolError as exc:
            raise RuntimeError(f"server rejected step: {exc.reason}") from exc
        obs = np.asarray(resp["observation"], dtype=np.float64)
        self._terminated = bool(resp["terminated"])
        return obs, float(resp["reward"]), self._terminated, False, resp["info"]

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
            self._client = None

    def render(self):
        return None

    @property
    def unwrapped(self):
        return self

    # ------------------------------------------------------------- plumbing

    def _action_bits(self, action) -> list[int]:
        if self._config.action_mode == DISCRETE:
            if isinstance(action, np.ndarray):
                if action.shape != ():
                    raise ValueError("discrete action must be a scalar")
                action = action.item()
            return index_to_bits(int(action), self.n_gnbs)
        arr = np.asarray(action)
        if arr.shape != (self.n_gnbs,):
            raise ValueError(
                f"action must have shape ({self.n_gnbs},), got {arr.shape}")
        return [int(b) for b in arr]

    def kpm_batch(self, **filters) -> list[dict]:
        """Pull UE-level telemetry rows for the latest tick (or a window)."""
        return self._client.kpm_batch(**filters)
