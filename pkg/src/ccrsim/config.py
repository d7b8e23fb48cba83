"""Run configuration: one YAML document, every key optional, unknown keys
rejected.

Schema (defaults shown)::

    scenario: hidden_obstacle        # turbulence | strong_wind | hidden_obstacle
    out: runs                        # parent directory for run directories
    seeds: [0]
    eval_episodes: 200
    physics:   {dt: 0.1, damping: 0.25, max_speed: 2.0, accel_scale: 3.0, episode_length: 35}
    scenario_params: {n_robots: 4, ..., communication_range: 1.5, appear_at_step: 0}
    ccr:       {lam: 30.0, enabled: true}
    train:     {algorithm: maddpg, pessimistic_penalty: 0.0, gamma: 0.95, tau: 0.01,
                batch_size: 256, buffer_capacity: 100000, episodes: 4000, warmup: 1000,
                update_every: 4, noise_scale: 0.3, noise_decay: 0.9995, lr_actor: 1.0e-4,
                lr_critic: 1.0e-3, hidden: 64, window: 3, model_degree: 1, model_episodes: 200}
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

import yaml

from .ccr import CcrConfig
from .marl.training import TrainConfig
from .physics import PhysicsConfig
from .scenarios import ScenarioKind, ScenarioParams


class ConfigError(ValueError):
    """Invalid run configuration; ``errors`` lists field-level messages."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioKind = ScenarioKind.HIDDEN_OBSTACLE
    out: str = "runs"
    seeds: tuple = (0,)
    eval_episodes: int = 200
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    scenario_params: ScenarioParams = field(default_factory=ScenarioParams)
    train: TrainConfig = field(default_factory=TrainConfig)

    @property
    def ccr(self) -> CcrConfig:
        return self.train.ccr

    def train_for_seed(self, seed: int) -> TrainConfig:
        return dataclasses.replace(self.train, seed=int(seed))

    def to_dict(self) -> dict:
        train = dataclasses.asdict(self.train)
        ccr = train.pop("ccr")
        train.pop("seed")
        sp = {k: (list(v) if isinstance(v, tuple) else v)
              for k, v in dataclasses.asdict(self.scenario_params).items()}
        return {
            "scenario": self.scenario.value,
            "out": self.out,
            "seeds": list(self.seeds),
            "eval_episodes": self.eval_episodes,
            "physics": dataclasses.asdict(self.physics),
            "scenario_params": sp,
            "ccr": ccr,
            "train": train,
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _build(cls, data, section: str, errors: list, coerce_tuples=False):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        errors.append(f"{section}: expected a mapping")
        return cls()
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            errors.append(f"{section}.{key}: unknown key")
    kwargs = {}
    for f in fields(cls):
        if f.name in data:
            v = data[f.name]
            if coerce_tuples and isinstance(v, list):
                v = tuple(v)
            kwargs[f.name] = v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        errors.append(f"{section}: {exc}")
        return cls()


TOP_KEYS = {"scenario", "out", "seeds", "eval_episodes", "physics", "scenario_params", "ccr", "train"}


def parse_config(data: dict | None) -> RunConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(["top level: expected a mapping"])
    errors: list[str] = []
    for key in data:
        if key not in TOP_KEYS:
            errors.append(f"{key}: unknown key")
    try:
        scenario = ScenarioKind.parse(data.get("scenario", "hidden_obstacle"))
    except ValueError as exc:
        errors.append(f"scenario: {exc}")
        scenario = ScenarioKind.HIDDEN_OBSTACLE
    seeds = data.get("seeds", [0])
    if isinstance(seeds, int):
        seeds = [seeds]
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        errors.append("seeds: expected a non-empty list of integers")
        seeds = [0]
    eval_episodes = data.get("eval_episodes", 200)
    if not isinstance(eval_episodes, int) or eval_episodes < 0:
        errors.append("eval_episodes: expected a non-negative integer")
        eval_episodes = 200
    out = data.get("out", "runs")
    if not isinstance(out, str):
        errors.append("out: expected a path string")
        out = "runs"
    physics = _build(PhysicsConfig, data.get("physics"), "physics", errors)
    sparams = _build(ScenarioParams, data.get("scenario_params"), "scenario_params", errors,
                     coerce_tuples=True)
    ccr = _build(CcrConfig, data.get("ccr"), "ccr", errors)
    train_data = dict(data.get("train") or {}) if isinstance(data.get("train") or {}, dict) else None
    if train_data is None:
        errors.append("train: expected a mapping")
        train_data = {}
    for bad in ("ccr", "seed"):
        if bad in train_data:
            errors.append(f"train.{bad}: unknown key (set it at the top level)")
            train_data.pop(bad)
    train = _build(TrainConfig, train_data, "train", errors)
    if errors:
        raise ConfigError(errors)
    train = dataclasses.replace(train, ccr=ccr, seed=seeds[0])
    return RunConfig(scenario, out, tuple(seeds), eval_episodes, physics, sparams, train)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError([f"{path}: not valid YAML ({exc})"]) from None
    return parse_config(data)
