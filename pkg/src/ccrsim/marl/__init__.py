from .agents import (Algorithm, PolicyBundle, apply_pessimistic_penalty, critic_target,
                     make_bundle, select_actions, update_actor, update_critic)
from .baseline import run_plain
from .buffer import Batch, ReplayBuffer
from .training import RunArtifacts, TrainConfig, run_training

__all__ = [
    "Algorithm", "Batch", "PolicyBundle", "ReplayBuffer", "RunArtifacts", "TrainConfig",
    "apply_pessimistic_penalty", "critic_target", "make_bundle", "run_plain", "run_training",
    "select_actions", "update_actor", "update_critic",
]
