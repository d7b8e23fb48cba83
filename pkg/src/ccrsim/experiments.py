"""Desk-scale A/B protocol: baseline MADDPG against the reflex-shaped variant.

Each (scenario, variant, seed) cell trains for the full episode budget and is
then evaluated noise-free. Results are cached as one JSON file per cell so
the protocol can be resumed, and so a test run can reuse finished cells.
A cached cell is reused only when its stored settings equal the requested ones.
"""
from __future__ import annotations

import dataclasses
import json
import time
from pathlib import Path

import numpy as np

from .ccr import CcrConfig
from .evaluation import MetricsSummary, evaluate
from .marl.training import TrainConfig, run_training
from .scenarios import ScenarioKind

VARIANTS = {
    "baseline": CcrConfig(lam=30.0, enabled=False),
    "ccr": CcrConfig(lam=30.0, enabled=True),
    "lam0": CcrConfig(lam=0.0, enabled=True),
}
SEEDS = (0, 1, 2)
EVAL_SEED_OFFSET = 1000


def cell_settings(kind, variant: str, seed: int, episodes: int, eval_episodes: int) -> dict:
    cfg = TrainConfig(ccr=VARIANTS[variant], episodes=episodes, seed=seed)
    return {"scenario": ScenarioKind.parse(kind).value, "variant": variant,
            "eval_episodes": eval_episodes, "eval_seed": seed + EVAL_SEED_OFFSET,
            "train": dataclasses.asdict(cfg)}


def run_cell(kind, variant: str, seed: int, episodes: int = 4000, eval_episodes: int = 200,
             cache_dir=None, log=print) -> dict:
    settings = cell_settings(kind, variant, seed, episodes, eval_episodes)
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"{settings['scenario']}-{variant}-seed{seed}-ep{episodes}.json"
        if path.exists():
            cached = json.loads(path.read_text())
            if cached.get("settings") == settings:
                return cached
    start = time.process_time()
    wall = time.time()
    art = run_training(TrainConfig(ccr=VARIANTS[variant], episodes=episodes, seed=seed), kind)
    train_cpu = time.process_time() - start
    summary, _ = evaluate(art, episodes=eval_episodes, seed=seed + EVAL_SEED_OFFSET)
    last = art.metrics[-200:]
    result = {
        "settings": settings,
        "summary": dataclasses.asdict(summary),
        "train_cpu_seconds": train_cpu,
        "wall_seconds": time.time() - wall,
        "final_train_success": float(np.mean([r["success_rate"] for r in last])) if last else 0.0,
        "final_train_danger": float(np.mean([r["dangerous_step_fraction"] for r in last])) if last else 0.0,
    }
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(result, indent=1))
    if log:
        log(f"{settings['scenario']} {variant} seed {seed}: danger "
            f"{summary.dangerous_behavior_frequency:.4f} success {summary.success_rate:.4f} "
            f"({train_cpu / 60:.1f} cpu-min)")
    return result


def mean_summary(cells) -> MetricsSummary:
    rows = [MetricsSummary(**c["summary"]) for c in cells]
    return MetricsSummary(
        rows[0].scenario, sum(r.episodes for r in rows),
        float(np.mean([r.dangerous_behavior_frequency for r in rows])),
        float(np.mean([r.success_rate for r in rows])),
        float(np.mean([r.mean_distance_to_danger_center for r in rows])),
        float(np.mean([r.mean_return for r in rows])),
    )


PROTOCOL = (
    ("hidden_obstacle", "baseline"), ("hidden_obstacle", "ccr"), ("hidden_obstacle", "lam0"),
    ("turbulence", "baseline"), ("turbulence", "ccr"),
)


def run_protocol(cache_dir, episodes: int = 4000, eval_episodes: int = 200, seeds=SEEDS,
                 cells=PROTOCOL, log=print) -> dict:
    """Every cell of the protocol; returns ``{(scenario, variant): [result per seed]}``."""
    out = {}
    for kind, variant in cells:
        out[(kind, variant)] = [run_cell(kind, variant, s, episodes, eval_episodes, cache_dir, log)
                                for s in seeds]
    return out


if __name__ == "__main__":
    import argparse

    ap = argparse.ArgumentParser(description="run or resume the desk-scale protocol")
    ap.add_argument("--cache", default="acceptance_cache")
    ap.add_argument("--episodes", type=int, default=4000)
    args = ap.parse_args()
    run_protocol(args.cache, args.episodes, log=lambda m: print(m, flush=True))
