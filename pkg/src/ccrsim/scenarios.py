"""The three emergency scenarios: generation, forces, observations, rewards.

Robots spawn in a vertical line on the left and travel in +x towards a
target on the right; the danger sits in between.

Observation vector layout for robot ``i`` (N robots)::

    [0:2]             own position
    [2:4]             own velocity
    [4:6]             displacement to the target
    [6:6+2(N-1)]      displacement to every other robot (ascending index,
                      self skipped), zeroed beyond observation_range
    [.. +3]           danger sense: (dx, dy) to danger centre, in-danger flag
    [.. +N]           emergency scores by robot index (only when enabled)
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import FLOAT, RngStream
from .physics import Disc, Rect, WorldState, initial_world

TWO_PI = 2.0 * np.pi


class ScenarioKind(str, enum.Enum):
    TURBULENCE = "turbulence"
    STRONG_WIND = "strong_wind"
    HIDDEN_OBSTACLE = "hidden_obstacle"

    @classmethod
    def parse(cls, name) -> "ScenarioKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower().replace("-", "_"))
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown scenario {name!r}; valid: {valid}") from None


@dataclass(frozen=True)
class ScenarioParams:
    """Generation ranges; every scenario draw stays inside these bounds."""

    n_robots: int = 4
    spawn_x: float = -1.0
    spawn_spacing: float = 0.3
    target_x: float = 1.0
    target_y: float = 0.0
    target_radius: float = 0.25
    arrival_tolerance: float = 0.1
    observation_range: float = 1.0
    communication_range: float = 1.5

    turbulence_radius: tuple = (0.25, 0.5)
    turbulence_center_x: tuple = (-0.2, 0.2)
    turbulence_center_y: tuple = (-0.3, 0.3)
    turbulence_force: float = 3.0
    appear_at_step: int = 0

    wind_side: tuple = (0.5, 1.0)
    wind_center_x: tuple = (-0.2, 0.2)
    wind_center_y: tuple = (-0.3, 0.3)
    wind_force: tuple = (0.0, -1.5)

    obstacle_width: tuple = (0.4, 0.8)
    obstacle_depth: tuple = (0.15, 0.3)
    obstacle_center_x: tuple = (-0.2, 0.2)
    obstacle_center_y: tuple = (-0.3, 0.3)

    def __post_init__(self):
        if not 2 <= self.n_robots <= 8:
            raise ValueError("n_robots must lie in [2, 8]")
        for name in ("target_radius", "arrival_tolerance", "observation_range",
                     "turbulence_force"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.communication_range < 0:
            raise ValueError("communication_range must be >= 0")
        for name in ("turbulence_radius", "wind_side", "obstacle_width", "obstacle_depth"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < lo <= hi")
        if self.appear_at_step < 0:
            raise ValueError("appear_at_step must be >= 0")
        # every draw must keep the danger strictly between spawn line and target zone
        extents = {
            "turbulence": (self.turbulence_center_x, self.turbulence_radius[1], self.target_radius),
            "wind": (self.wind_center_x, self.wind_side[1] / 2, self.arrival_tolerance),
            "obstacle": (self.obstacle_center_x, self.obstacle_depth[1] / 2, self.arrival_tolerance),
        }
        for name, ((cx_lo, cx_hi), half, zone) in extents.items():
            if not (self.spawn_x < cx_lo - half and cx_hi + half < self.target_x - zone):
                raise ValueError(f"{name} danger may overlap the spawn line or target zone")


@dataclass(frozen=True)
class ScenarioSpec:
    kind: ScenarioKind
    danger: Disc | Rect
    target: np.ndarray
    target_radius: float  # disc target (turbulence) or arrival tolerance
    spawn_positions: np.ndarray
    observation_range: float
    communication_range: float
    force_magnitude: float = 0.0
    wind: np.ndarray = field(default_factory=lambda: np.zeros(2))
    appear_at_step: int = 0

    @property
    def n_robots(self) -> int:
        return len(self.spawn_positions)

    @property
    def obstacle(self) -> Rect | None:
        return self.danger if self.kind is ScenarioKind.HIDDEN_OBSTACLE else None

    @property
    def stochastic(self) -> bool:
        return self.kind is ScenarioKind.TURBULENCE

    @property
    def danger_center(self) -> np.ndarray:
        return self.danger.center

    def spawn_region(self) -> Rect:
        lo = self.spawn_positions.min(axis=0) - 0.05
        hi = self.spawn_positions.max(axis=0) + 0.05
        return Rect(lo, hi)

    def active(self, step: int) -> bool:
        return step >= self.appear_at_step

    def in_area(self, positions) -> np.ndarray:
        """Membership in the (force-applying) danger area."""
        if self.kind is ScenarioKind.HIDDEN_OBSTACLE:
            return self.danger.interior(positions)
        return self.danger.contains(positions)

    def force_at(self, positions, step: int, rng: np.random.Generator) -> np.ndarray:
        """External force for every robot. Consumes exactly N angle draws for
        turbulence regardless of who is inside, keeping streams aligned."""
        positions = np.asarray(positions, dtype=FLOAT)
        n = len(positions)
        out = np.zeros((n, 2), dtype=FLOAT)
        if self.kind is ScenarioKind.TURBULENCE:
            phi = rng.uniform(0.0, TWO_PI, size=n)
            if self.active(step):
                inside = self.in_area(positions)
                out[inside, 0] = self.force_magnitude * np.cos(phi[inside])
                out[inside, 1] = self.force_magnitude * np.sin(phi[inside])
        elif self.kind is ScenarioKind.STRONG_WIND and self.active(step):
            out[self.in_area(positions)] = self.wind
        return out

    def danger_flags(self, positions, collided, step: int) -> np.ndarray:
        if self.kind is ScenarioKind.HIDDEN_OBSTACLE:
            return np.asarray(collided, dtype=bool).copy()
        if not self.active(step):
            return np.zeros(len(positions), dtype=bool)
        return self.in_area(positions)


def spawn_line(params: ScenarioParams) -> np.ndarray:
    n = params.n_robots
    ys = (np.arange(n, dtype=FLOAT) - 0.5 * (n - 1)) * params.spawn_spacing
    return np.stack([np.full(n, params.spawn_x, dtype=FLOAT), ys], axis=1)


def generate_scenario(kind, rng: RngStream | np.random.Generator,
                      params: ScenarioParams | None = None) -> ScenarioSpec:
    kind = ScenarioKind.parse(kind)
    params = params or ScenarioParams()
    g = rng.generator() if isinstance(rng, RngStream) else rng
    target = np.array([params.target_x, params.target_y], dtype=FLOAT)
    common = dict(kind=kind, target=target, spawn_positions=spawn_line(params),
                  observation_range=params.observation_range,
                  communication_range=params.communication_range)

    if kind is ScenarioKind.TURBULENCE:
        radius = g.uniform(*params.turbulence_radius)
        center = np.array([g.uniform(*params.turbulence_center_x),
                           g.uniform(*params.turbulence_center_y)])
        return ScenarioSpec(danger=Disc(center, radius), target_radius=params.target_radius,
                            force_magnitude=params.turbulence_force,
                            appear_at_step=params.appear_at_step, **common)
    if kind is ScenarioKind.STRONG_WIND:
        side = g.uniform(*params.wind_side)
        center = np.array([g.uniform(*params.wind_center_x), g.uniform(*params.wind_center_y)])
        half = np.array([side, side]) / 2
        return ScenarioSpec(danger=Rect(center - half, center + half),
                            target_radius=params.arrival_tolerance,
                            wind=np.array(params.wind_force, dtype=FLOAT),
                            appear_at_step=params.appear_at_step, **common)
    width = g.uniform(*params.obstacle_width)
    depth = g.uniform(*params.obstacle_depth)
    center = np.array([g.uniform(*params.obstacle_center_x), g.uniform(*params.obstacle_center_y)])
    half = np.array([depth, width]) / 2
    return ScenarioSpec(danger=Rect(center - half, center + half),
                        target_radius=params.arrival_tolerance, **common)


def reset_world(spec: ScenarioSpec, episode_rng: RngStream) -> WorldState:
    return initial_world(spec.spawn_positions, episode_rng)


# ---------------------------------------------------------------- observations

def observation_dim(n_robots: int, include_scores: bool) -> int:
    return 6 + 2 * (n_robots - 1) + 3 + (n_robots if include_scores else 0)


def danger_sense(world: WorldState, spec: ScenarioSpec) -> np.ndarray:
    """``(N, 3)``: relative danger centre and flag while sensing, else zeros."""
    n = world.n_robots
    out = np.zeros((n, 3), dtype=FLOAT)
    if spec.kind is ScenarioKind.HIDDEN_OBSTACLE:
        out[:, 2] = world.contact.astype(FLOAT)
        return out
    if not spec.active(world.step):
        return out
    inside = spec.in_area(world.positions)
    out[inside, :2] = spec.danger_center - world.positions[inside]
    out[inside, 2] = 1.0
    return out


def observation_matrix(world: WorldState, spec: ScenarioSpec, scores=None,
                       comm_masks=None) -> np.ndarray:
    """Stacked observation vectors, one row per robot.

    With ``scores`` given, the emergency-score block is appended; entry
    ``[i, j]`` is robot j's score if j is in robot i's communication range.
    """
    p, v = world.positions, world.velocities
    n = world.n_robots
    rel = p[None, :, :] - p[:, None, :]  # rel[i, j] = p_j - p_i
    dist = np.sqrt(np.sum(rel * rel, axis=-1))
    rel = np.where((dist <= spec.observation_range)[..., None], rel, 0.0)
    off_diag = ~np.eye(n, dtype=bool)
    others = rel[off_diag].reshape(n, 2 * (n - 1))
    blocks = [p, v, spec.target - p, others, danger_sense(world, spec)]
    if scores is not None:
        from .ccr import masked_scores
        if comm_masks is None:
            from .ccr import communication_masks
            comm_masks = communication_masks(p, spec.communication_range)
        blocks.append(masked_scores(scores, comm_masks))
    return np.concatenate(blocks, axis=1)


@dataclass(frozen=True)
class Observation:
    own_position: np.ndarray
    own_velocity: np.ndarray
    rel_target: np.ndarray
    rel_robots: np.ndarray  # (N-1, 2)
    danger_sense: np.ndarray  # (3,)
    emergency_scores: np.ndarray  # (N,)

    def as_vector(self, include_scores: bool = True) -> np.ndarray:
        parts = [self.own_position, self.own_velocity, self.rel_target,
                 self.rel_robots.ravel(), self.danger_sense]
        if include_scores:
            parts.append(self.emergency_scores)
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, vec, n_robots: int) -> "Observation":
        vec = np.asarray(vec, dtype=FLOAT)
        k = 6 + 2 * (n_robots - 1)
        scores = vec[k + 3:k + 3 + n_robots]
        if len(scores) == 0:
            scores = np.zeros(n_robots)
        return cls(vec[0:2].copy(), vec[2:4].copy(), vec[4:6].copy(),
                   vec[6:k].reshape(n_robots - 1, 2).copy(), vec[k:k + 3].copy(), scores.copy())


def build_observation(world: WorldState, robot_id: int, spec: ScenarioSpec) -> Observation:
    if not 0 <= robot_id < world.n_robots:
        raise IndexError(f"robot_id {robot_id} out of range")
    row = observation_matrix(world, spec)[robot_id]
    return Observation.from_vector(row, world.n_robots)


# ---------------------------------------------------------------- rewards and predicates

def env_rewards(world: WorldState, spec: ScenarioSpec) -> np.ndarray:
    d = world.positions - spec.target
    return -np.sqrt(np.sum(d * d, axis=1))


def env_reward(world_next: WorldState, robot_id: int, spec: ScenarioSpec) -> float:
    return float(env_rewards(world_next, spec)[robot_id])


def is_dangerous(world: WorldState, robot_id: int, spec: ScenarioSpec, collided: bool) -> bool:
    flags = spec.danger_flags(world.positions[robot_id:robot_id + 1],
                              np.array([collided]), world.step)
    return bool(flags[0])


def success_flags(world: WorldState, spec: ScenarioSpec) -> np.ndarray:
    d = world.positions - spec.target
    near = np.sqrt(np.sum(d * d, axis=1)) <= spec.target_radius
    if spec.kind is ScenarioKind.TURBULENCE:
        return near
    past = world.positions[:, 0] > spec.danger.hi[0]
    return near & past


def is_success(final_world: WorldState, robot_id: int, spec: ScenarioSpec) -> bool:
    return bool(success_flags(final_world, spec)[robot_id])


def danger_force(spec: ScenarioSpec, position, rng: RngStream | np.random.Generator,
                 step: int | None = None) -> np.ndarray:
    """Force on a single robot at ``position``."""
    g = rng.generator() if isinstance(rng, RngStream) else rng
    step = spec.appear_at_step if step is None else step
    return spec.force_at(np.asarray(position, dtype=FLOAT)[None, :], step, g)[0]
