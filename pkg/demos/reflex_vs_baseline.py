"""Train a plain MADDPG team and a reflex-shaped team side by side.

Both teams see the same scenario layouts, noise and replay samples; the only
difference is the pairwise reflex reward (and the neighbour scores in the
observation). A few hundred episodes is far too short for a fair verdict,
but it is enough to watch the two training curves separate. The full
three-seed protocol lives in ``ccrsim.experiments``.

Run with:  python demos/reflex_vs_baseline.py --episodes 300
"""
import argparse

import numpy as np

from ccrsim.ccr import CcrConfig
from ccrsim.evaluation import compare_runs, evaluate, format_comparison
from ccrsim.marl.training import TrainConfig, run_training

ap = argparse.ArgumentParser()
ap.add_argument("--episodes", type=int, default=300)
ap.add_argument("--scenario", default="hidden_obstacle")
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

results = {}
for name, ccr in [("baseline", CcrConfig(lam=30.0, enabled=False)),
                  ("reflex", CcrConfig(lam=30.0, enabled=True))]:
    cfg = TrainConfig(ccr=ccr, episodes=args.episodes, seed=args.seed)
    art = run_training(cfg, args.scenario)
    danger = np.array([r["dangerous_step_fraction"] for r in art.metrics])
    # training curve in five chunks
    chunks = np.array_split(danger, 5)
    print(f"{name:9s} training danger by fifth: "
          + "  ".join(f"{c.mean():.3f}" for c in chunks))
    summary, _ = evaluate(art, episodes=100, seed=args.seed + 1000)
    results[name] = summary

print()
print(format_comparison(compare_runs(results["baseline"], results["reflex"]),
                        "baseline", "reflex"))
