"""A quick tour of the three hazard scenarios.

Four robots start on a vertical line on the left and must reach the target
zone on the right. A scripted "head straight for the target" controller runs
through a handful of random layouts of each scenario and we count how often
it ends up in danger. No learning is involved here.

Run with:  python demos/scenario_tour.py
"""
import numpy as np

from ccrsim.ccr import CcrConfig
from ccrsim.core import RngStream
from ccrsim.dynamics_model import pretrain_model
from ccrsim.marl.episode import Episode
from ccrsim.physics import PhysicsConfig
from ccrsim.scenarios import ScenarioKind, generate_scenario


def greedy(run):
    # unit vector towards the target, one row per robot
    d = run.spec.target - run.world.positions
    return d / np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-9)


physics = PhysicsConfig()
# the episode always scores robots, so it needs a fitted model; a small one will do
model = pretrain_model(physics, seed=7, episodes=20)
off = CcrConfig(lam=0.0, enabled=False)

for kind in ScenarioKind:
    danger, arrived = [], []
    for ep in range(20):
        spec = generate_scenario(kind, RngStream(7, 1).child(ep))
        run = Episode(spec, physics, model, off, RngStream(7, 2).child(ep))
        steps_in_danger = 0
        while not run.done:
            rec = run.step(greedy(run))
            steps_in_danger += int(rec.danger.sum())
        danger.append(steps_in_danger / (spec.n_robots * physics.episode_length))
        arrived.append(run.success().mean())

    print(f"{kind.value:16s} danger fraction {np.mean(danger):.3f}   "
          f"arrived {np.mean(arrived):.2f}")

# one layout in detail
spec = generate_scenario("hidden_obstacle", RngStream(7, 1).child(0))
print()
print("hidden obstacle layout, seed 7 episode 0")
print("  obstacle x:", np.round([spec.danger.lo[0], spec.danger.hi[0]], 3),
      " y:", np.round([spec.danger.lo[1], spec.danger.hi[1]], 3))
print("  spawn positions:", np.round(spec.spawn_positions, 2).tolist())
print("  target:", spec.target.tolist())
