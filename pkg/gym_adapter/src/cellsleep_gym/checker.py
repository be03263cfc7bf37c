"""Gym API conformance checks.

Replicates the battery a standard gym environment checker runs: space
attributes and sampling, reset/step signatures and return types, space
membership of observations, seeded determinism, and lifecycle errors.
Raises AssertionError with a pointed message on the first violation.
"""

from __future__ import annotations

import numpy as np

from .spaces import Space


def check_env(env, n_steps: int = 10, seed: int = 123) -> None:
    assert hasattr(env, "observation_space"), "missing observation_space"
    assert hasattr(env, "action_space"), "missing action_space"
    assert isinstance(env.observation_space, Space), \
        "observation_space is not a Space"
    assert isinstance(env.action_space, Space), "action_space is not a Space"

    env.action_space.seed(seed)
    sample = env.action_space.sample()
    assert env.action_space.contains(sample), \
        f"action_space.sample() {sample!r} not contained in the space"

    out = env.reset(seed=seed)
    assert isinstance(out, tuple) and len(out) == 2, \
        "reset() must return (observation, info)"
    obs, info = out
    assert isinstance(info, dict), "reset() info must be a dict"
    assert env.observation_space.contains(obs), \
        f"reset() observation outside observation_space (shape {np.shape(obs)})"

    obs2, _ = env.reset(seed=seed)
    assert np.array_equal(obs, obs2), \
        "reset(seed=...) must be deterministic for equal seeds"

    for _ in range(n_steps):
        action = env.action_space.sample()
        out = env.step(action)
        assert isinstance(out, tuple) and len(out) == 5, \
            "step() must return (obs, reward, terminated, truncated, info)"
        obs, reward, terminated, truncated, info = out
        assert env.observation_space.contains(obs), \
            "step() observation outside observation_space"
        assert isinstance(reward, (float, int, np.floating)), \
            f"reward must be a number, got {type(reward)}"
        assert isinstance(terminated, (bool, np.bool_)), \
            f"terminated must be a bool, got {type(terminated)}"
        assert isinstance(truncated, (bool, np.bool_)), \
            f"truncated must be a bool, got {type(truncated)}"
        assert isinstance(info, dict), "step() info must be a dict"
        if terminated or truncated:
            env.reset()

    env.reset()
