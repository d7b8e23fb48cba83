"""Training loop for IDDPG / MADDPG with the optional pessimistic penalty and
emergency-reflex shaping."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..ccr import CcrConfig
from ..core import (STREAM_EXPLORATION, STREAM_INIT, STREAM_PHYSICS, STREAM_REPLAY,
                    STREAM_SCENARIO, RngStream)
from ..dynamics_model import PhysicalModel, pretrain_model
from ..neural import load_checkpoint, save_checkpoint
from ..physics import PhysicsConfig
from ..scenarios import ScenarioKind, ScenarioParams, generate_scenario, observation_dim
from .agents import Algorithm, PolicyBundle, make_bundle, select_actions, train_step
from .buffer import ReplayBuffer
from .episode import Episode

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("episode", "mean_return", "success_rate", "dangerous_step_fraction",
                  "mean_emergency_score", "noise_scale")


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = "maddpg"
    pessimistic_penalty: float = 0.0
    ccr: CcrConfig = field(default_factory=CcrConfig)
    gamma: float = 0.95
    tau: float = 0.01
    batch_size: int = 256
    buffer_capacity: int = 100_000
    episodes: int = 4000
    warmup: int = 1000
    update_every: int = 4
    noise_scale: float = 0.3
    noise_decay: float = 0.9995
    lr_actor: float = 1e-4
    lr_critic: float = 1e-3
    hidden: int = 64
    window: int = 3
    model_degree: int = 1
    model_episodes: int = 200
    seed: int = 0

    def __post_init__(self):
        Algorithm.parse(self.algorithm)
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.pessimistic_penalty < 0:
            raise ValueError("pessimistic_penalty must be >= 0")
        for name in ("batch_size", "buffer_capacity", "update_every", "hidden", "model_degree"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("episodes", "warmup", "window", "model_episodes"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.noise_scale < 0 or not 0 < self.noise_decay <= 1:
            raise ValueError("noise_scale must be >= 0 and noise_decay in (0, 1]")


@dataclass
class RunArtifacts:
    bundle: PolicyBundle
    model: PhysicalModel
    metrics: list[dict]
    train_cfg: TrainConfig
    scenario_kind: ScenarioKind
    physics: PhysicsConfig
    scenario_params: ScenarioParams

    @property
    def include_scores(self) -> bool:
        return self.train_cfg.ccr.enabled

    def metrics_csv(self) -> str:
        return metrics_to_csv(self.metrics)

    def save(self, directory) -> Path:
        d = Path(directory)
        ck = d / "checkpoints"
        ck.mkdir(parents=True, exist_ok=True)
        save_bundle(self.bundle, ck)
        self.model.save(ck / "physical_model.txt")
        (d / "metrics.csv").write_text(self.metrics_csv())
        return d


def metrics_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for row in rows:
        w.writerow([row["episode"]] + [repr(float(row[c])) for c in METRIC_COLUMNS[1:]])
    return buf.getvalue()


def save_bundle(bundle: PolicyBundle, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for i in range(bundle.n_robots):
        save_checkpoint(bundle.actors[i], d / f"actor_{i}.bin")
        save_checkpoint(bundle.critics[i], d / f"critic_{i}.bin")
        save_checkpoint(bundle.target_actors[i], d / f"target_actor_{i}.bin")
        save_checkpoint(bundle.target_critics[i], d / f"target_critic_{i}.bin")


def load_bundle(directory, algorithm) -> PolicyBundle:
    from ..neural import AdamState
    d = Path(directory)
    actors, critics, tactors, tcritics = [], [], [], []
    i = 0
    while (d / f"actor_{i}.bin").exists():
        actors.append(load_checkpoint(d / f"actor_{i}.bin"))
        critics.append(load_checkpoint(d / f"critic_{i}.bin"))
        tactors.append(load_checkpoint(d / f"target_actor_{i}.bin"))
        tcritics.append(load_checkpoint(d / f"target_critic_{i}.bin"))
        i += 1
    if not actors:
        raise FileNotFoundError(f"no actor checkpoints in {d}")
    return PolicyBundle(Algorithm.parse(algorithm), actors, critics, tactors, tcritics,
                        [AdamState.for_params(a.params) for a in actors],
                        [AdamState.for_params(c.params) for c in critics])


def episode_metrics(episode: int, env_returns, success, danger_count, score_sum,
                    n_robots: int, length: int, noise: float) -> dict:
    steps = n_robots * length
    return {
        "episode": episode,
        "mean_return": float(np.mean(env_returns)),
        "success_rate": float(np.mean(success)),
        "dangerous_step_fraction": danger_count / steps,
        "mean_emergency_score": score_sum / steps,
        "noise_scale": noise,
    }


def run_training(train_cfg: TrainConfig, scenario_kind, physics: PhysicsConfig | None = None,
                 scenario_params: ScenarioParams | None = None,
                 model: PhysicalModel | None = None, progress=None) -> RunArtifacts:
    """Train one policy bundle and return it with its per-episode metric log."""
    kind = ScenarioKind.parse(scenario_kind)
    physics = physics or PhysicsConfig()
    params = scenario_params or ScenarioParams()
    cfg = train_cfg
    seed = cfg.seed
    n = params.n_robots
    if model is None:
        model = pretrain_model(physics, seed, n, cfg.model_episodes, cfg.model_degree)

    obs_dim = observation_dim(n, cfg.ccr.enabled)
    bundle = make_bundle(cfg.algorithm, n, obs_dim, RngStream(seed, STREAM_INIT).generator(),
                         cfg.hidden, cfg.lr_actor, cfg.lr_critic)
    buffer = ReplayBuffer(cfg.buffer_capacity, n, obs_dim)
    replay_rng = RngStream(seed, STREAM_REPLAY).generator()
    scenario_rng = RngStream(seed, STREAM_SCENARIO)
    physics_rng = RngStream(seed, STREAM_PHYSICS)
    explore_rng = RngStream(seed, STREAM_EXPLORATION)

    metrics = []
    noise = cfg.noise_scale
    total_steps = 0
    for ep in range(cfg.episodes):
        spec = generate_scenario(kind, scenario_rng.child(ep), params)
        run = Episode(spec, physics, model, cfg.ccr, physics_rng.child(ep), cfg.window,
                      cfg.pessimistic_penalty)
        g = explore_rng.child(ep).generator()
        returns = np.zeros(n)
        danger = 0
        score_sum = 0.0
        while not run.done:
            actions = select_actions(bundle, run.obs, noise, g)
            rec = run.step(actions)
            buffer.add(rec.obs, rec.actions, rec.rewards, rec.next_obs,
                       np.full(n, float(rec.done)))
            returns += rec.env_rewards
            danger += int(rec.danger.sum())
            score_sum += float(rec.scores.sum())
            total_steps += 1
            if len(buffer) >= max(cfg.warmup, 1) and total_steps % cfg.update_every == 0:
                train_step(bundle, buffer.sample(cfg.batch_size, replay_rng), cfg.gamma, cfg.tau)
        row = episode_metrics(ep, returns, run.success(), danger, score_sum, n,
                              physics.episode_length, noise)
        metrics.append(row)
        if progress is not None:
            progress(row)
        noise *= cfg.noise_decay
    return RunArtifacts(bundle, model, metrics, cfg, kind, physics, params)


def config_dict(cfg: TrainConfig) -> dict:
    return asdict(cfg)
