"""Shared value types, small vector helpers and the seeded RNG contract.

Vectors are plain ``numpy`` arrays of shape ``(2,)`` (float64). Joint
quantities for N robots are ``(N, 2)`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FLOAT = np.float64


def vec2(x: float, y: float) -> np.ndarray:
    return np.array([x, y], dtype=FLOAT)


def norm2(v) -> float:
    """Euclidean norm of a 2-vector."""
    v = np.asarray(v, dtype=FLOAT)
    return float(np.hypot(v[0], v[1]))


def squared_distance(a, b) -> float:
    a = np.asarray(a, dtype=FLOAT)
    b = np.asarray(b, dtype=FLOAT)
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return float(dx * dx + dy * dy)


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"{name} contains non-finite values: {arr!r}")


@dataclass(frozen=True)
class RobotState:
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=FLOAT))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=FLOAT))

    def as_vector(self) -> np.ndarray:
        """``[px, py, vx, vy]``."""
        return np.concatenate([self.position, self.velocity])

    @classmethod
    def from_vector(cls, v) -> "RobotState":
        v = np.asarray(v, dtype=FLOAT)
        return cls(v[:2].copy(), v[2:4].copy())


@dataclass(frozen=True)
class Action:
    accel: np.ndarray

    def __post_init__(self):
        a = np.clip(np.asarray(self.accel, dtype=FLOAT), -1.0, 1.0)
        object.__setattr__(self, "accel", a)


@dataclass(frozen=True)
class Transition:
    robot_id: int
    state: RobotState
    action: Action
    reward: float
    next_state: RobotState
    step_index: int


# Purpose tags keep streams for different consumers disjoint.
STREAM_SCENARIO = 1
STREAM_PHYSICS = 2
STREAM_EXPLORATION = 3
STREAM_REPLAY = 4
STREAM_INIT = 5
STREAM_EVAL = 6
STREAM_MODEL_DATA = 7


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    ``(seed, stream_id)`` fully determines the sequence. ``child`` derives
    independent sub-streams (e.g. one per step or per robot) without sharing
    state, so results never depend on the order in which streams are consumed.
    """

    seed: int
    stream_id: int = 0
    path: tuple = field(default=())

    def child(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.seed) & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(int(self.stream_id),) + self.path,
        )
        return np.random.Generator(np.random.Philox(ss))
