"""One episode of environment interaction with emergency scoring and the
optional reward/observation augmentations wired in."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ccr import CcrConfig, ScoreBoard, augment_rewards, communication_masks, intrinsic_rewards
from ..core import RngStream
from ..dynamics_model import EmergencyTracker, PhysicalModel, raw_scores
from ..physics import PhysicsConfig, step_world
from ..scenarios import ScenarioSpec, env_rewards, observation_matrix, reset_world, success_flags
from .agents import apply_pessimistic_penalty


@dataclass
class StepRecord:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray  # what the learner sees
    env_rewards: np.ndarray
    intrinsic: np.ndarray
    danger: np.ndarray
    collided: np.ndarray
    scores: np.ndarray  # smoothed scores after this step
    next_obs: np.ndarray
    done: bool


class Episode:
    def __init__(self, spec: ScenarioSpec, physics: PhysicsConfig, model: PhysicalModel,
                 ccr: CcrConfig, episode_rng: RngStream, window: int = 3,
                 penalty: float = 0.0):
        self.spec = spec
        self.physics = physics
        self.model = model
        self.ccr = ccr
        self.penalty = penalty
        self.include_scores = ccr.enabled
        self.world = reset_world(spec, episode_rng)
        self.tracker = EmergencyTracker(spec.n_robots, window)
        self.scores = self.tracker.current.copy()
        self.masks = communication_masks(self.world.positions, spec.communication_range)
        self.obs = self._observe()

    def _observe(self) -> np.ndarray:
        scores = self.scores if self.include_scores else None
        return observation_matrix(self.world, self.spec, scores, self.masks)

    @property
    def done(self) -> bool:
        return self.world.step >= self.physics.episode_length

    def step(self, actions) -> StepRecord:
        before = self.world
        after, info = step_world(before, actions, self.spec, self.physics)
        r_env = env_rewards(after, self.spec)
        rewards = apply_pessimistic_penalty(r_env, info.in_danger, self.penalty)

        # the reward for this transition uses the scores known at time t
        board = ScoreBoard(self.scores, before.positions, after.positions)
        if self.ccr.enabled:
            intrinsic = intrinsic_rewards(board, self.ccr, self.masks)
            rewards = augment_rewards(rewards, board, self.ccr, self.masks)
        else:
            intrinsic = np.zeros(before.n_robots)

        raws = raw_scores(self.model, before.state_matrix(), np.clip(actions, -1.0, 1.0),
                          after.state_matrix())
        self.scores = self.tracker.update_all(raws)
        self.world = after
        self.masks = communication_masks(after.positions, self.spec.communication_range)
        obs = self.obs
        self.obs = self._observe()
        return StepRecord(obs, np.asarray(actions), rewards, r_env, intrinsic, info.in_danger,
                          info.collided, self.scores.copy(), self.obs, self.done)

    def success(self) -> np.ndarray:
        return success_flags(self.world, self.spec)
