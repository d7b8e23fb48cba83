"""Plain MADDPG/IDDPG loop with no reward shaping at all.

Written directly against the simulator so that it shares none of the
shaping plumbing in :mod:`.episode`. It serves as the reference the shaped
trainer must reproduce bit for bit when every shaping feature is switched off.
Emergency scores are still computed, but only for the metric log.
"""
from __future__ import annotations

import numpy as np

from ..core import (STREAM_EXPLORATION, STREAM_INIT, STREAM_PHYSICS, STREAM_REPLAY,
                    STREAM_SCENARIO, RngStream)
from ..dynamics_model import EmergencyTracker, PhysicalModel, pretrain_model, raw_scores
from ..physics import PhysicsConfig, step_world
from ..scenarios import (ScenarioKind, ScenarioParams, env_rewards, generate_scenario,
                         observation_dim, observation_matrix, reset_world, success_flags)
from .agents import make_bundle, select_actions, train_step
from .buffer import ReplayBuffer
from .training import RunArtifacts, TrainConfig, episode_metrics


def run_plain(train_cfg: TrainConfig, scenario_kind, physics: PhysicsConfig | None = None,
              scenario_params: ScenarioParams | None = None,
              model: PhysicalModel | None = None) -> RunArtifacts:
    kind = ScenarioKind.parse(scenario_kind)
    physics = physics or PhysicsConfig()
    params = scenario_params or ScenarioParams()
    cfg = train_cfg
    n = params.n_robots
    if model is None:
        model = pretrain_model(physics, cfg.seed, n, cfg.model_episodes, cfg.model_degree)

    obs_dim = observation_dim(n, False)
    bundle = make_bundle(cfg.algorithm, n, obs_dim, RngStream(cfg.seed, STREAM_INIT).generator(),
                         cfg.hidden, cfg.lr_actor, cfg.lr_critic)
    buffer = ReplayBuffer(cfg.buffer_capacity, n, obs_dim)
    replay_rng = RngStream(cfg.seed, STREAM_REPLAY).generator()

    metrics = []
    noise = cfg.noise_scale
    t_total = 0
    for ep in range(cfg.episodes):
        spec = generate_scenario(kind, RngStream(cfg.seed, STREAM_SCENARIO).child(ep), params)
        world = reset_world(spec, RngStream(cfg.seed, STREAM_PHYSICS).child(ep))
        g = RngStream(cfg.seed, STREAM_EXPLORATION).child(ep).generator()
        tracker = EmergencyTracker(n, cfg.window)
        obs = observation_matrix(world, spec)
        returns = np.zeros(n)
        danger, score_sum = 0, 0.0
        for t in range(physics.episode_length):
            actions = select_actions(bundle, obs, noise, g)
            nxt, info = step_world(world, actions, spec, physics)
            r = env_rewards(nxt, spec)
            scores = tracker.update_all(raw_scores(model, world.state_matrix(),
                                                   np.clip(actions, -1.0, 1.0),
                                                   nxt.state_matrix()))
            next_obs = observation_matrix(nxt, spec)
            done = t == physics.episode_length - 1
            buffer.add(obs, actions, r, next_obs, np.full(n, float(done)))
            returns += r
            danger += int(info.in_danger.sum())
            score_sum += float(scores.sum())
            world, obs = nxt, next_obs
            t_total += 1
            if len(buffer) >= max(cfg.warmup, 1) and t_total % cfg.update_every == 0:
                train_step(bundle, buffer.sample(cfg.batch_size, replay_rng), cfg.gamma, cfg.tau)
        metrics.append(episode_metrics(ep, returns, success_flags(world, spec), danger, score_sum,
                                       n, physics.episode_length, noise))
        noise *= cfg.noise_decay
    return RunArtifacts(bundle, model, metrics, cfg, kind, physics, params)
