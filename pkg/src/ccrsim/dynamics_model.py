"""Learned physical model and emergency scores.

The model maps ``(state, action)`` to the next state with one polynomial per
output dimension. Its prediction error on a real transition, squared, is the
raw emergency score; a rolling mean over the last ``m + 1`` raw scores gives
the smoothed score that robots share.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import FLOAT, STREAM_MODEL_DATA, RngStream, RobotState, Transition
from .physics import PhysicsConfig, initial_world, step_world

STATE_DIM = 4
ACTION_DIM = 2
RIDGE_EPS = 1e-8


def polynomial_features(states, actions, degree: int = 1) -> np.ndarray:
    """``[1, p, v, a]`` plus all monomials up to ``degree`` of those 6 inputs."""
    z = np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1).astype(FLOAT)
    cols = [np.ones(len(z), dtype=FLOAT)]
    base = z.shape[1]
    for d in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(base), d):
            cols.append(np.prod(z[:, combo], axis=1))
    return np.stack(cols, axis=1)


def n_features(degree: int) -> int:
    return polynomial_features(np.zeros((1, STATE_DIM)), np.zeros((1, ACTION_DIM)), degree).shape[1]


@dataclass
class FitDiagnostics:
    n_samples: int
    rank: int
    ridge_fallback: bool
    train_rmse: float


@dataclass
class PhysicalModel:
    degree: int = 1
    # (n_features, STATE_DIM); column k predicts next-state dimension k
    coefficients: np.ndarray | None = None
    diagnostics: FitDiagnostics | None = None

    @property
    def fitted(self) -> bool:
        return self.coefficients is not None

    def predict_matrix(self, states, actions) -> np.ndarray:
        if self.coefficients is None:
            raise RuntimeError("physical model has not been fitted")
        return polynomial_features(states, actions, self.degree) @ self.coefficients

    def save(self, path) -> None:
        """Plain-text matrix, one row per output dimension."""
        header = f"degree={self.degree} rows=output_dim cols=feature"
        np.savetxt(path, self.coefficients.T, header=header, fmt="%.17g")

    @classmethod
    def load(cls, path) -> "PhysicalModel":
        with open(path) as fh:
            first = fh.readline()
        degree = int(first.split("degree=")[1].split()[0])
        coef = np.atleast_2d(np.loadtxt(path, dtype=FLOAT)).T
        return cls(degree=degree, coefficients=np.ascontiguousarray(coef))


def _stack(dataset):
    if isinstance(dataset, tuple):
        s, a, s2 = (np.asarray(x, dtype=FLOAT) for x in dataset)
        return s, a, s2
    dataset = list(dataset)
    s = np.array([t.state.as_vector() for t in dataset], dtype=FLOAT)
    a = np.array([t.action.accel for t in dataset], dtype=FLOAT)
    s2 = np.array([t.next_state.as_vector() for t in dataset], dtype=FLOAT)
    return s, a, s2


def fit(model: PhysicalModel, dataset) -> PhysicalModel:
    """Ordinary least squares for every output dimension.

    ``dataset`` is a sequence of :class:`Transition` or a tuple of arrays
    ``(states (T, 4), actions (T, 2), next_states (T, 4))``.
    """
    s, a, s2 = _stack(dataset)
    if len(s) == 0:
        raise ValueError("cannot fit a physical model on an empty dataset")
    X = polynomial_features(s, a, model.degree)
    coef, _, rank, _ = np.linalg.lstsq(X, s2, rcond=None)
    fallback = rank < X.shape[1]
    if fallback:
        gram = X.T @ X + RIDGE_EPS * np.eye(X.shape[1])
        coef = np.linalg.solve(gram, X.T @ s2)
    resid = X @ coef - s2
    diag = FitDiagnostics(len(s), int(rank), bool(fallback), float(np.sqrt(np.mean(resid ** 2))))
    return PhysicalModel(model.degree, coef, diag)


def predict(model: PhysicalModel, state: RobotState, action) -> RobotState:
    accel = getattr(action, "accel", action)
    out = model.predict_matrix(state.as_vector()[None, :], np.asarray(accel)[None, :])[0]
    return RobotState.from_vector(out)


def raw_score(predicted, actual) -> float:
    """Squared Euclidean error over ``[px, py, vx, vy]``."""
    p = predicted.as_vector() if isinstance(predicted, RobotState) else np.asarray(predicted)
    q = actual.as_vector() if isinstance(actual, RobotState) else np.asarray(actual)
    d = p - q
    return float(d @ d)


def raw_scores(model: PhysicalModel, states, actions, next_states) -> np.ndarray:
    """Vectorised raw scores for one joint transition (rows = robots)."""
    d = model.predict_matrix(states, actions) - next_states
    return np.sum(d * d, axis=1)


@dataclass
class EmergencyTracker:
    n_robots: int
    m: int = 3
    windows: list = field(default=None)
    current: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("window parameter m must be >= 0")
        self.reset()

    def reset(self) -> None:
        self.windows = [deque(maxlen=self.m + 1) for _ in range(self.n_robots)]
        self.current = np.zeros(self.n_robots, dtype=FLOAT)

    def update(self, robot_id: int, raw: float) -> float:
        if raw < 0:
            raise ValueError("raw score must be non-negative")
        w = self.windows[robot_id]
        w.append(float(raw))
        total = 0.0
        for x in w:
            total += x
        self.current[robot_id] = total / len(w)
        return float(self.current[robot_id])

    def update_all(self, raws) -> np.ndarray:
        for i, r in enumerate(raws):
            self.update(i, r)
        return self.current.copy()


def update_tracker(tracker: EmergencyTracker, robot_id: int, raw: float) -> float:
    return tracker.update(robot_id, raw)


def collect_free_transitions(cfg: PhysicsConfig, n_episodes: int, n_robots: int,
                             rng: RngStream, spawn_scale: float = 1.5):
    """Random-action rollouts in an emergency-free world.

    Returns arrays ``(states, actions, next_states)`` stacked over all
    robot-steps.
    """
    S, A, S2 = [], [], []
    for ep in range(n_episodes):
        g = rng.child(ep).generator()
        world = initial_world(g.uniform(-spawn_scale, spawn_scale, size=(n_robots, 2)),
                              rng.child(ep, 1))
        for _ in range(cfg.episode_length):
            act = g.uniform(-1.0, 1.0, size=(n_robots, 2))
            nxt, _ = step_world(world, act, None, cfg)
            S.append(world.state_matrix())
            A.append(act)
            S2.append(nxt.state_matrix())
            world = nxt
    return np.concatenate(S), np.concatenate(A), np.concatenate(S2)


def pretrain_model(cfg: PhysicsConfig, seed: int, n_robots: int = 4, episodes: int = 200,
                   degree: int = 1) -> PhysicalModel:
    data = collect_free_transitions(cfg, episodes, n_robots, RngStream(seed, STREAM_MODEL_DATA))
    return fit(PhysicalModel(degree=degree), data)


def transitions_from_arrays(states, actions, next_states) -> list[Transition]:
    from .core import Action
    return [Transition(0, RobotState.from_vector(s), Action(a), 0.0, RobotState.from_vector(s2), k)
            for k, (s, a, s2) in enumerate(zip(states, actions, next_states))]
