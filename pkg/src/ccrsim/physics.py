"""Damped double-integrator particle world.

Every robot is a point mass. Per step::

    v' = (1 - damping) * v + (accel_scale * a + f) * dt     (then speed clamp)
    p' = p + v' * dt

Robots never collide with each other; solid obstacles are resolved by hard
projection onto the face the robot entered through.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import FLOAT, Action, RngStream, RobotState, _check_finite


@dataclass(frozen=True)
class PhysicsConfig:
    dt: float = 0.1
    damping: float = 0.25
    max_speed: float = 2.0
    # gain from the unit action box to world acceleration
    accel_scale: float = 3.0
    episode_length: int = 35

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if not self.max_speed > 0:
            raise ValueError("max_speed must be positive")
        if not self.accel_scale > 0:
            raise ValueError("accel_scale must be positive")
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[lo.x, hi.x] x [lo.y, hi.y]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=FLOAT)
        hi = np.asarray(self.hi, dtype=FLOAT)
        if not np.all(hi > lo):
            raise ValueError(f"degenerate rectangle lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def size(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, points) -> np.ndarray:
        """Closed-set membership, vectorised over ``(..., 2)``."""
        p = np.asarray(points, dtype=FLOAT)
        return np.all((p >= self.lo) & (p <= self.hi), axis=-1)

    def interior(self, points) -> np.ndarray:
        """Open-set membership: boundary points are outside."""
        p = np.asarray(points, dtype=FLOAT)
        return np.all((p > self.lo) & (p < self.hi), axis=-1)


@dataclass(frozen=True)
class Disc:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=FLOAT))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def contains(self, points) -> np.ndarray:
        d = np.asarray(points, dtype=FLOAT) - self.center
        return np.sum(d * d, axis=-1) <= self.radius * self.radius


@dataclass(frozen=True)
class WorldState:
    positions: np.ndarray  # (N, 2)
    velocities: np.ndarray  # (N, 2)
    step: int
    episode_rng: RngStream
    # obstacle contact recorded by the most recent step
    contact: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.positions)
        if self.contact is None:
            object.__setattr__(self, "contact", np.zeros(n, dtype=bool))

    @property
    def n_robots(self) -> int:
        return len(self.positions)

    @property
    def robots(self) -> list[RobotState]:
        return [self.robot(i) for i in range(self.n_robots)]

    def robot(self, i: int) -> RobotState:
        return RobotState(self.positions[i].copy(), self.velocities[i].copy())

    def state_matrix(self) -> np.ndarray:
        """``(N, 4)`` rows of ``[px, py, vx, vy]``."""
        return np.concatenate([self.positions, self.velocities], axis=1)


@dataclass(frozen=True)
class StepInfo:
    collided: np.ndarray  # (N,) bool, obstacle contact this step
    in_danger: np.ndarray  # (N,) bool, unsafe behaviour this step
    forces: np.ndarray  # (N, 2) external forces applied


def initial_world(positions, episode_rng: RngStream) -> WorldState:
    positions = np.array(positions, dtype=FLOAT)
    return WorldState(positions, np.zeros_like(positions), 0, episode_rng)


def _integrate_arrays(p, v, accel, force, cfg: PhysicsConfig):
    v_new = (1.0 - cfg.damping) * v + (cfg.accel_scale * accel + force) * cfg.dt
    speed = np.sqrt(np.sum(v_new * v_new, axis=-1, keepdims=True))
    over = speed > cfg.max_speed
    if np.any(over):
        v_new = np.where(over, v_new * (cfg.max_speed / np.where(over, speed, 1.0)), v_new)
    p_new = p + v_new * cfg.dt
    return p_new, v_new


def integrate(state: RobotState, action: Action, external_force, cfg: PhysicsConfig) -> RobotState:
    force = np.asarray(external_force, dtype=FLOAT)
    for name, arr in (("position", state.position), ("velocity", state.velocity),
                      ("action", action.accel), ("force", force)):
        _check_finite(name, arr)
    p, v = _integrate_arrays(state.position, state.velocity, action.accel, force, cfg)
    return RobotState(p, v)


def _entry_axis(before: np.ndarray, after: np.ndarray, rect: Rect) -> tuple[int, float]:
    """Face crossed when moving ``before -> after`` into ``rect``.

    Returns ``(axis, face_coordinate)``. The entry face is the one crossed
    last along the segment; if ``before`` is already inside, the face of least
    penetration is used.
    """
    best_axis, best_t, best_face = -1, -np.inf, 0.0
    for axis in (0, 1):
        b, a = before[axis], after[axis]
        lo, hi = rect.lo[axis], rect.hi[axis]
        if b <= lo < a:
            t, face = (lo - b) / (a - b), lo
        elif b >= hi > a:
            t, face = (b - hi) / (b - a), hi
        else:
            continue
        if t > best_t:
            best_axis, best_t, best_face = axis, t, face
    if best_axis >= 0:
        return best_axis, best_face
    depths = np.array([after[0] - rect.lo[0], rect.hi[0] - after[0],
                       after[1] - rect.lo[1], rect.hi[1] - after[1]])
    k = int(np.argmin(depths))
    axis = k // 2
    face = rect.lo[axis] if k % 2 == 0 else rect.hi[axis]
    return axis, face


def resolve_obstacle(state_before: RobotState, state_after: RobotState, obstacle: Rect):
    """Push a robot that ended inside ``obstacle`` back onto its entry face.

    Returns ``(state, collided)``.
    """
    if not bool(obstacle.interior(state_after.position)):
        return state_after, False
    axis, face = _entry_axis(state_before.position, state_after.position, obstacle)
    p = state_after.position.copy()
    v = state_after.velocity.copy()
    p[axis] = face
    v[axis] = 0.0
    return RobotState(p, v), True


def step_world(world: WorldState, actions, scenario, cfg: PhysicsConfig):
    """Advance every robot one step.

    ``scenario`` may be ``None`` for an emergency-free world. Returns
    ``(next_world, StepInfo)``.
    """
    accel = _action_matrix(actions, world.n_robots)
    p, v = world.positions, world.velocities
    _check_finite("positions", p)
    _check_finite("velocities", v)
    if scenario is None:
        force = np.zeros_like(p)
    else:
        # only random force laws draw; skip building a generator otherwise
        stochastic = getattr(scenario, "stochastic", True)
        rng = world.episode_rng.child(world.step).generator() if stochastic else None
        force = scenario.force_at(p, world.step, rng)
    _check_finite("force", force)
    p_new, v_new = _integrate_arrays(p, v, accel, force, cfg)

    collided = np.zeros(world.n_robots, dtype=bool)
    obstacle = getattr(scenario, "obstacle", None)
    if obstacle is not None:
        hit = obstacle.interior(p_new)
        for i in np.flatnonzero(hit):
            axis, face = _entry_axis(p[i], p_new[i], obstacle)
            p_new[i, axis] = face
            v_new[i, axis] = 0.0
            collided[i] = True

    nxt = WorldState(p_new, v_new, world.step + 1, world.episode_rng, collided)
    if scenario is None:
        in_danger = np.zeros(world.n_robots, dtype=bool)
    else:
        in_danger = scenario.danger_flags(nxt.positions, collided, nxt.step)
    return nxt, StepInfo(collided, in_danger, force)


def _action_matrix(actions, n: int) -> np.ndarray:
    if isinstance(actions, np.ndarray):
        if actions.shape != (n, 2):
            raise ValueError(f"expected actions of shape ({n}, 2), got {actions.shape}")
        a = actions.astype(FLOAT, copy=False)
    else:
        actions = list(actions)
        if len(actions) != n:
            raise ValueError(f"expected {n} actions, got {len(actions)}")
        a = np.array([x.accel if isinstance(x, Action) else x for x in actions], dtype=FLOAT)
    _check_finite("actions", a)
    return np.clip(a, -1.0, 1.0)
