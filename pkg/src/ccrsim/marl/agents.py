"""IDDPG / MADDPG actors, critics and their update rules.

MADDPG critics see the joint observation and every robot's action; IDDPG
critics see only their own robot's observation and action. Actors always act
on their own observation.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..core import FLOAT
from ..neural import AdamState, Mlp, adam_step, backward, forward, soft_update
from .buffer import Batch

ACTION_DIM = 2


class Algorithm(str, enum.Enum):
    IDDPG = "iddpg"
    MADDPG = "maddpg"

    @classmethod
    def parse(cls, name) -> "Algorithm":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown algorithm {name!r}; valid: iddpg, maddpg") from None


def critic_input_dim(algorithm: Algorithm, n_robots: int, obs_dim: int) -> int:
    if algorithm is Algorithm.MADDPG:
        return n_robots * (obs_dim + ACTION_DIM)
    return obs_dim + ACTION_DIM


@dataclass
class PolicyBundle:
    algorithm: Algorithm
    actors: list
    critics: list
    target_actors: list
    target_critics: list
    actor_opts: list
    critic_opts: list

    @property
    def n_robots(self) -> int:
        return len(self.actors)

    @property
    def obs_dim(self) -> int:
        return self.actors[0].sizes[0]


def make_bundle(algorithm, n_robots: int, obs_dim: int, rng: np.random.Generator,
                hidden: int = 64, lr_actor: float = 1e-4, lr_critic: float = 1e-3) -> PolicyBundle:
    algorithm = Algorithm.parse(algorithm)
    cin = critic_input_dim(algorithm, n_robots, obs_dim)
    actors, critics = [], []
    for _ in range(n_robots):
        actors.append(Mlp([obs_dim, hidden, hidden, ACTION_DIM], "relu", "tanh", rng=rng))
        critics.append(Mlp([cin, hidden, hidden, 1], "relu", "identity", rng=rng))
    return PolicyBundle(
        algorithm, actors, critics,
        [a.copy() for a in actors], [c.copy() for c in critics],
        [AdamState.for_params(a.params, lr=lr_actor) for a in actors],
        [AdamState.for_params(c.params, lr=lr_critic) for c in critics],
    )


def policy_actions(actors, observations) -> np.ndarray:
    """Deterministic actions, one actor per robot. ``observations`` is
    ``(N, D)`` or a batch ``(S, N, D)``."""
    obs = np.asarray(observations, dtype=FLOAT)
    if obs.ndim == 2:
        return np.stack([forward(a, obs[i])[0] for i, a in enumerate(actors)])
    return np.stack([forward(a, obs[:, i])[0] for i, a in enumerate(actors)], axis=1)


def select_actions(bundle: PolicyBundle, observations, noise_scale: float,
                   rng: np.random.Generator | None) -> np.ndarray:
    a = policy_actions(bundle.actors, observations)
    if noise_scale > 0:
        a = a + rng.normal(0.0, noise_scale, size=a.shape)
    return np.clip(a, -1.0, 1.0)


def critic_inputs(algorithm: Algorithm, i: int, obs, actions) -> np.ndarray:
    """Critic input rows for robot ``i`` from ``(S, N, D)`` obs and
    ``(S, N, 2)`` actions."""
    if algorithm is Algorithm.MADDPG:
        S = obs.shape[0]
        return np.concatenate([obs.reshape(S, -1), actions.reshape(S, -1)], axis=1)
    return np.concatenate([obs[:, i], actions[:, i]], axis=1)


def action_slot(algorithm: Algorithm, i: int, n_robots: int, obs_dim: int) -> slice:
    if algorithm is Algorithm.MADDPG:
        start = n_robots * obs_dim + ACTION_DIM * i
    else:
        start = obs_dim
    return slice(start, start + ACTION_DIM)


def critic_target(bundle: PolicyBundle, batch: Batch, gamma: float, i: int,
                  next_actions=None) -> np.ndarray:
    """Bootstrapped targets ``y = r_i + gamma * (1 - done) * Q'_i(x', a')``
    using only target networks."""
    if next_actions is None:
        next_actions = policy_actions(bundle.target_actors, batch.next_obs)
    x = critic_inputs(bundle.algorithm, i, batch.next_obs, next_actions)
    q_next = forward(bundle.target_critics[i], x)[0][:, 0]
    return batch.rewards[:, i] + gamma * (1.0 - batch.done[:, i]) * q_next


def update_critic(bundle: PolicyBundle, batch: Batch, targets, i: int) -> float:
    """One Adam step on the mean squared TD error; returns the pre-step loss."""
    critic = bundle.critics[i]
    x = critic_inputs(bundle.algorithm, i, batch.obs, batch.actions)
    q, cache = forward(critic, x)
    diff = q[:, 0] - targets
    S = len(diff)
    loss = float(diff @ diff / S)
    grads, _ = backward(critic, cache, (2.0 / S) * diff[:, None])
    adam_step(critic.params, grads, bundle.critic_opts[i])
    return loss


def actor_objective_grad(bundle: PolicyBundle, batch: Batch, i: int):
    """Mean critic value with robot i's action replaced by its actor output,
    and the gradient of that mean w.r.t. robot i's actor parameters."""
    actor, critic = bundle.actors[i], bundle.critics[i]
    a_i, cache_a = forward(actor, batch.obs[:, i])
    actions = batch.actions.copy()
    actions[:, i] = a_i
    x = critic_inputs(bundle.algorithm, i, batch.obs, actions)
    q, cache_q = forward(critic, x)
    S = len(q)
    _, dx = backward(critic, cache_q, np.full((S, 1), 1.0 / S))
    da = dx[:, action_slot(bundle.algorithm, i, bundle.n_robots, bundle.obs_dim)]
    grads, _ = backward(actor, cache_a, da)
    return float(q.mean()), grads


def update_actor(bundle: PolicyBundle, batch: Batch, i: int) -> float:
    """Gradient ascent step on the critic's value of the actor's action."""
    objective, grads = actor_objective_grad(bundle, batch, i)
    adam_step(bundle.actors[i].params, [-g for g in grads], bundle.actor_opts[i])
    return objective


def update_targets(bundle: PolicyBundle, tau: float) -> None:
    for k in range(bundle.n_robots):
        soft_update(bundle.target_actors[k].params, bundle.actors[k].params, tau)
        soft_update(bundle.target_critics[k].params, bundle.critics[k].params, tau)


def train_step(bundle: PolicyBundle, batch: Batch, gamma: float, tau: float) -> None:
    """Critic then actor update for every robot on one shared minibatch,
    followed by a soft target update."""
    next_actions = policy_actions(bundle.target_actors, batch.next_obs)
    for i in range(bundle.n_robots):
        y = critic_target(bundle, batch, gamma, i, next_actions)
        update_critic(bundle, batch, y, i)
        update_actor(bundle, batch, i)
    update_targets(bundle, tau)


def apply_pessimistic_penalty(rewards, danger_flags, penalty: float) -> np.ndarray:
    r = np.array(rewards, dtype=FLOAT)
    flags = np.asarray(danger_flags, dtype=bool)
    if len(flags) != len(r):
        raise ValueError("reward and flag lists differ in length")
    if penalty:
        r[flags] -= penalty
    return r
