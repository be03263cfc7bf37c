"""Compact PPO (clipped surrogate + GAE) for discrete-action remote envs.

Self-contained on torch because the usual RL training packages are not
installable in every deployment of this adapter. Tuned for smoke-scale
runs, not benchmark performance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn
from torch.distributions import Categorical


@dataclass
class PpoConfig:
    total_steps: int = 10_000
    rollout_steps: int = 512
    minibatch_size: int = 128
    epochs: int = 4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_ratio: float = 0.2
    lr: float = 3e-4
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    max_grad_norm: float = 0.5
    seed: int = 0


@dataclass
class TrainResult:
    steps_done: int
    updates: int
    episode_returns: list[float] = field(default_factory=list)


class ActorCritic(nn.Module):
    def __init__(self, obs_dim: int, n_actions: int, hidden: int = 64):
        super().__init__()
        self.body = nn.Sequential(
            nn.Linear(obs_dim, hidden), nn.Tanh(),
            nn.Linear(hidden, hidden), nn.Tanh(),
        )
        self.policy_head = nn.Linear(hidden, n_actions)
        self.value_head = nn.Linear(hidden, 1)

    def forward(self, obs: torch.Tensor):
        z = self.body(obs)
        return self.policy_head(z), self.value_head(z).squeeze(-1)

    def act(self, obs: torch.Tensor):
        logits, value = self(obs)
        dist = Categorical(logits=logits)
        action = dist.sample()
        return action, dist.log_prob(action), value


def _normalize(obs: np.ndarray, mean: np.ndarray, var: np.ndarray) -> np.ndarray:
    return (obs - mean) / np.sqrt(var + 1e-8)


class RunningNorm:
    """Streaming mean/variance (Welford) for observation scaling."""

    def __init__(self, dim: int):
        self.mean = np.zeros(dim)
        self.m2 = np.ones(dim)
        self.count = 1e-4

    def update(self, x: np.ndarray) -> None:
        self.count += 1.0
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    @property
    def var(self) -> np.ndarray:
        return self.m2 / self.count


def train(env, config: PpoConfig | None = None) -> TrainResult:
    """Run PPO against a gym-API env with a Discrete action space until
    ``total_steps`` environment steps are consumed."""
    cfg = config or PpoConfig()
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    env.action_space.seed(cfg.seed)

    obs_dim = int(np.prod(env.observation_space.shape))
    n_actions = int(env.action_space.n)
    model = ActorCritic(obs_dim, n_actions)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    norm = RunningNorm(obs_dim)

    obs, _ = env.reset(seed=cfg.seed)
    norm.update(obs)
    episode_return = 0.0
    result = TrainResult(steps_done=0, updates=0)

    while result.steps_done < cfg.total_steps:
        horizon = min(cfg.rollout_steps, cfg.total_steps - result.steps_done)
        buf_obs = np.empty((horizon, obs_dim))
        buf_act = np.empty(horizon, dtype=np.int64)
        buf_logp = np.empty(horizon)
        buf_val = np.empty(horizon)
        buf_rew = np.empty(horizon)
        buf_done = np.empty(horizon)

        for t in range(horizon):
            scaled = _normalize(obs, norm.mean, norm.var)
            with torch.no_grad():
                action, logp, value = model.act(
                    torch.as_tensor(scaled, dtype=torch.float32))
            next_obs, reward, terminated, truncated, _ = env.step(int(action))
            done = terminated or truncated
            buf_obs[t] = scaled
            buf_act[t] = int(action)
            buf_logp[t] = float(logp)
            buf_val[t] = float(value)
            buf_rew[t] = reward
            buf_done[t] = float(done)
            episode_return += reward
            result.steps_done += 1
            if done:
                result.episode_returns.append(episode_return)
                episode_return = 0.0
                next_obs, _ = env.reset()
            obs = next_obs
            norm.update(obs)

        with torch.no_grad():
            _, last_value = model(torch.as_tensor(
                _normalize(obs, norm.mean, norm.var), dtype=torch.float32))

        # GAE over the rollout; bootstrap is cut at episode boundaries
        advantages = np.zeros(horizon)
        last_adv = 0.0
        next_value = float(last_value)
        for t in reversed(range(horizon)):
            mask = 1.0 - buf_done[t]
            delta = buf_rew[t] + cfg.gamma * next_value * mask - buf_val[t]
            last_adv = delta + cfg.gamma * cfg.gae_lambda * mask * last_adv
            advantages[t] = last_adv
            next_value = buf_val[t]
        returns = advantages + buf_val
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

        obs_t = torch.as_tensor(buf_obs, dtype=torch.float32)
        act_t = torch.as_tensor(buf_act)
        logp_t = torch.as_tensor(buf_logp, dtype=torch.float32)
        adv_t = torch.as_tensor(advantages, dtype=torch.float32)
        ret_t = torch.as_tensor(returns, dtype=torch.float32)

        for _ in range(cfg.epochs):
            order = rng.permutation(horizon)
            for start in range(0, horizon, cfg.minibatch_size):
                idx = order[start:start + cfg.minibatch_size]
                logits, values = model(obs_t[idx])
                dist = Categorical(logits=logits)
                ratio = torch.exp(dist.log_prob(act_t[idx]) - logp_t[idx])
                clipped = torch.clamp(
                    ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio)
                policy_loss = -torch.min(
                    ratio * adv_t[idx], clipped * adv_t[idx]).mean()
                value_loss = ((values - ret_t[idx]) ** 2).mean()
                loss = (policy_loss
                        + cfg.value_coef * value_loss
                        - cfg.entropy_coef * dist.entropy().mean())
                optimizer.zero_grad()
                loss.backward()
                nn.utils.clip_grad_norm_(model.parameters(), cfg.max_grad_norm)
                optimizer.step()
        result.updates += 1

    return result
