"""How a robot notices that something is wrong without being told.

Every robot carries a small linear model of its own free-space dynamics,
fitted once from hazard-free episodes. When the world stops behaving like the
model predicts (wind pushes it sideways, an obstacle stops it dead) the
prediction error jumps. Its rolling mean is the robot's emergency score.

Here we drive the robots straight at the target through a strong-wind patch
and print each robot's score next to the steps it spent inside the wind.

Run with:  python demos/emergency_scores.py
"""
import numpy as np

from ccrsim.ccr import CcrConfig
from ccrsim.core import RngStream
from ccrsim.dynamics_model import pretrain_model
from ccrsim.marl.episode import Episode
from ccrsim.physics import PhysicsConfig
from ccrsim.scenarios import generate_scenario

physics = PhysicsConfig()
model = pretrain_model(physics, seed=0, episodes=200)
print("model fit RMSE on its own data:", f"{model.diagnostics.train_rmse:.2e}")

# look for a layout where the wind catches some robots but not all of them
for ep in range(50):
    spec = generate_scenario("strong_wind", RngStream(3, 1).child(ep))
    run = Episode(spec, physics, model, CcrConfig(lam=30.0), RngStream(3, 2).child(ep))
    scores, danger, bonus = [], [], []
    while not run.done:
        d = spec.target - run.world.positions
        rec = run.step(d / np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-9))
        scores.append(rec.scores)
        danger.append(rec.danger)
        bonus.append(rec.intrinsic)
    danger = np.array(danger)
    hit = danger.any(axis=0)
    if hit.any() and not hit.all():
        break

scores = np.array(scores)
bonus = np.array(bonus)
print(f"episode {ep}: wind patch centre {np.round(spec.danger_center, 2).tolist()}")
print()
print("step " + "  ".join(f"robot{i}     " for i in range(spec.n_robots)))
for t in range(len(scores)):
    cells = []
    for i in range(spec.n_robots):
        mark = "*" if danger[t, i] else " "
        cells.append(f"{scores[t, i]:9.2e}{mark}  ")
    print(f"{t:4d} " + "".join(cells))
print()
print("* marks a step spent inside the wind patch")

print("mean score while in the wind:   ", f"{scores[danger].mean():.3e}")
print("mean score of robots never hit: ",
      f"{scores[:, ~hit].mean():.3e}" if (~hit).any() else "n/a")
print("total reflex reward per robot:  ", np.round(bonus.sum(axis=0), 3).tolist())
