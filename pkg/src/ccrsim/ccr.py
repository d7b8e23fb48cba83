"""Emergency-score sharing and the pairwise intrinsic reward.

For robots ``i`` and ``j`` (positions at ``t`` and ``t+1``)::

    h_i(j)     = |p_i(t+1) - p_j(t)| - |p_i(t) - p_j(t)|
    R_i(j)     = lam * (E_j - E_i) * h_i(j) / (1 + |p_i(t) - p_j(t)|)
    R_i        = sum over j != i inside i's communication range of R_i(j)

Moving away from a robot with a higher score is rewarded; moving towards it
is penalised, and the reverse for robots with lower scores.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import FLOAT


@dataclass(frozen=True)
class CcrConfig:
    lam: float = 30.0
    enabled: bool = True

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lam must be >= 0")

    @property
    def active(self) -> bool:
        return self.enabled and self.lam != 0.0


@dataclass(frozen=True)
class ScoreBoard:
    scores: np.ndarray  # (N,) smoothed scores at time t
    positions_t: np.ndarray  # (N, 2)
    positions_t1: np.ndarray  # (N, 2)

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=FLOAT)
        p0 = np.asarray(self.positions_t, dtype=FLOAT)
        p1 = np.asarray(self.positions_t1, dtype=FLOAT)
        if not (len(s) == len(p0) == len(p1)):
            raise ValueError("scores and position lists must have equal length")
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "positions_t", p0)
        object.__setattr__(self, "positions_t1", p1)

    @property
    def n_robots(self) -> int:
        return len(self.scores)


def _check_pair(i: int, j: int) -> None:
    if i == j:
        raise ValueError("pairwise terms need two distinct robots")


def _dist(a, b) -> float:
    dx, dy = a[0] - b[0], a[1] - b[1]
    return float(np.sqrt(dx * dx + dy * dy))


def change_in_distance(board: ScoreBoard, i: int, j: int) -> float:
    _check_pair(i, j)
    pj = board.positions_t[j]
    return _dist(board.positions_t1[i], pj) - _dist(board.positions_t[i], pj)


def pair_reward(board: ScoreBoard, cfg: CcrConfig, i: int, j: int) -> float:
    _check_pair(i, j)
    h = change_in_distance(board, i, j)
    d = _dist(board.positions_t[i], board.positions_t[j])
    return cfg.lam * ((board.scores[j] - board.scores[i]) * h / (1.0 + d))


def intrinsic_reward(board: ScoreBoard, cfg: CcrConfig, i: int, comm_mask) -> float:
    """Sum of pair rewards over in-range robots, ascending index."""
    total = 0.0
    for j in range(board.n_robots):
        if j != i and comm_mask[j]:
            total += pair_reward(board, cfg, i, j)
    return total


def communication_masks(positions, communication_range: float) -> np.ndarray:
    """``(N, N)`` bool, ``[i, j]`` true when j is within i's range. The
    diagonal is always true; a zero range isolates every robot."""
    p = np.asarray(positions, dtype=FLOAT)
    rel = p[None, :, :] - p[:, None, :]
    dist = np.sqrt(np.sum(rel * rel, axis=-1))
    mask = (dist <= communication_range) & (communication_range > 0)
    np.fill_diagonal(mask, True)
    return mask


def _pairwise(a, b) -> np.ndarray:
    dx = a[:, None, 0] - b[None, :, 0]
    dy = a[:, None, 1] - b[None, :, 1]
    return np.sqrt(dx * dx + dy * dy)


def intrinsic_rewards(board: ScoreBoard, cfg: CcrConfig, comm_masks) -> np.ndarray:
    """Vectorised :func:`intrinsic_reward` for every robot.

    Accumulates column by column in ascending ``j`` so the summation order
    matches the scalar path.
    """
    p0, p1, e = board.positions_t, board.positions_t1, board.scores
    d0 = _pairwise(p0, p0)
    d1 = _pairwise(p1, p0)
    h = d1 - d0
    pair = cfg.lam * ((e[None, :] - e[:, None]) * h / (1.0 + d0))
    use = np.asarray(comm_masks, dtype=bool) & ~np.eye(board.n_robots, dtype=bool)
    total = np.zeros(board.n_robots, dtype=FLOAT)
    for j in range(board.n_robots):
        total += np.where(use[:, j], pair[:, j], 0.0)
    return total


def augment_rewards(env_rewards, board: ScoreBoard, cfg: CcrConfig, comm_masks) -> np.ndarray:
    r = np.array(env_rewards, dtype=FLOAT)
    if len(r) != board.n_robots:
        raise ValueError("reward list length does not match the score board")
    if not cfg.enabled:
        return r
    return r + intrinsic_rewards(board, cfg, comm_masks)


def masked_scores(scores, comm_masks) -> np.ndarray:
    """``(N, N)``: row i holds the scores robot i receives (own always kept)."""
    s = np.asarray(scores, dtype=FLOAT)
    return np.where(np.asarray(comm_masks, dtype=bool), s[None, :], 0.0)


def augment_observations(observations, board: ScoreBoard, comm_masks) -> list:
    """Fill the emergency-score slots of each :class:`Observation`."""
    filled = masked_scores(board.scores, comm_masks)
    return [replace(obs, emergency_scores=filled[i].copy()) for i, obs in enumerate(observations)]
