from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..core import FLOAT


class Batch(NamedTuple):
    obs: np.ndarray  # (S, N, D)
    actions: np.ndarray  # (S, N, 2)
    rewards: np.ndarray  # (S, N)
    next_obs: np.ndarray  # (S, N, D)
    done: np.ndarray  # (S, N)


class ReplayBuffer:
    """Ring buffer of joint transitions; the oldest entry is overwritten first."""

    def __init__(self, capacity: int, n_robots: int, obs_dim: int, action_dim: int = 2):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.obs = np.zeros((capacity, n_robots, obs_dim), dtype=FLOAT)
        self.actions = np.zeros((capacity, n_robots, action_dim), dtype=FLOAT)
        self.rewards = np.zeros((capacity, n_robots), dtype=FLOAT)
        self.next_obs = np.zeros((capacity, n_robots, obs_dim), dtype=FLOAT)
        self.done = np.zeros((capacity, n_robots), dtype=FLOAT)
        self.size = 0
        self.cursor = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, actions, rewards, next_obs, done) -> None:
        k = self.cursor
        self.obs[k] = obs
        self.actions[k] = actions
        self.rewards[k] = rewards
        self.next_obs[k] = next_obs
        self.done[k] = done
        self.cursor = (k + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return self.take(idx)

    def take(self, idx) -> Batch:
        return Batch(self.obs[idx], self.actions[idx], self.rewards[idx],
                     self.next_obs[idx], self.done[idx])
