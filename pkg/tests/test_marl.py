import numpy as np
import pytest

from ccrsim.ccr import CcrConfig
from ccrsim.core import RngStream
from ccrsim.dynamics_model import pretrain_model
from ccrsim.marl import (Batch, ReplayBuffer, TrainConfig, apply_pessimistic_penalty,
                         critic_target, make_bundle, run_plain, run_training, select_actions,
                         update_actor, update_critic)
from ccrsim.marl.agents import actor_objective_grad, critic_input_dim, Algorithm, train_step
from ccrsim.marl.episode import Episode
from ccrsim.marl.training import load_bundle, save_bundle
from ccrsim.physics import PhysicsConfig
from ccrsim.scenarios import generate_scenario

N, D = 3, 6


def random_batch(rng, S=16):
    return Batch(rng.normal(size=(S, N, D)), rng.uniform(-1, 1, (S, N, 2)), rng.normal(size=(S, N)),
                 rng.normal(size=(S, N, D)), (rng.random((S, N)) < 0.3).astype(float))


@pytest.fixture
def bundle():
    return make_bundle("maddpg", N, D, np.random.default_rng(0), hidden=8)


def test_critic_input_dims():
    assert critic_input_dim(Algorithm.MADDPG, 4, 19) == 4 * 21
    assert critic_input_dim(Algorithm.IDDPG, 4, 19) == 21


def test_critic_target_uses_target_networks_only(bundle):
    batch = random_batch(np.random.default_rng(1))
    y = critic_target(bundle, batch, 0.95, 0)
    for net in bundle.critics + bundle.actors:
        for p in net.params:
            p += 10.0
    assert np.array_equal(critic_target(bundle, batch, 0.95, 0), y)


def test_critic_target_terminal_drops_bootstrap(bundle):
    batch = random_batch(np.random.default_rng(1))
    batch = batch._replace(done=np.ones_like(batch.done))
    assert np.array_equal(critic_target(bundle, batch, 0.95, 1), batch.rewards[:, 1])


def test_iddpg_target_ignores_other_robots():
    b = make_bundle("iddpg", N, D, np.random.default_rng(0), hidden=8)
    batch = random_batch(np.random.default_rng(2))
    y = critic_target(b, batch, 0.9, 0)
    nxt = batch.next_obs.copy()
    nxt[:, 1:] += 5.0
    assert np.array_equal(critic_target(b, batch._replace(next_obs=nxt), 0.9, 0), y)


def test_update_critic_reduces_loss(bundle):
    batch = random_batch(np.random.default_rng(3))
    y = critic_target(bundle, batch, 0.95, 0)
    losses = [update_critic(bundle, batch, y, 0) for _ in range(200)]
    assert losses[-1] < 0.5 * losses[0]


def test_update_actor_increases_objective(bundle):
    batch = random_batch(np.random.default_rng(4))
    before = actor_objective_grad(bundle, batch, 2)[0]
    for _ in range(50):
        update_actor(bundle, batch, 2)
    assert actor_objective_grad(bundle, batch, 2)[0] > before


@pytest.mark.parametrize("algo", ["maddpg", "iddpg"])
def test_policy_gradient_finite_differences(algo):
    """Chain rule through critic into actor parameters."""
    b = make_bundle(algo, N, D, np.random.default_rng(5), hidden=6)
    batch = random_batch(np.random.default_rng(6), S=8)
    i = 1
    _, grads = actor_objective_grad(b, batch, i)
    h, worst = 1e-5, 0.0
    for p, g in zip(b.actors[i].params, grads):
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = actor_objective_grad(b, batch, i)[0]
            p[idx] = old - h
            dn = actor_objective_grad(b, batch, i)[0]
            p[idx] = old
            num = (up - dn) / (2 * h)
            worst = max(worst, abs(num - g[idx]) / max(1.0, abs(num), abs(g[idx])))
    assert worst < 1e-3


def test_train_step_moves_targets_by_tau(bundle):
    batch = random_batch(np.random.default_rng(7))
    t0 = bundle.target_actors[0].flat()
    train_step(bundle, batch, 0.95, 0.25)
    online = bundle.actors[0].flat()
    assert np.allclose(bundle.target_actors[0].flat(), 0.75 * t0 + 0.25 * online, atol=1e-14)


def test_select_actions_clipped_and_deterministic(bundle):
    obs = np.random.default_rng(8).normal(size=(N, D))
    a = select_actions(bundle, obs, 5.0, np.random.default_rng(9))
    assert (np.abs(a) <= 1).all()
    assert np.array_equal(a, select_actions(bundle, obs, 5.0, np.random.default_rng(9)))
    assert np.array_equal(select_actions(bundle, obs, 0.0, None),
                          select_actions(bundle, obs, 0.0, None))


def test_pessimistic_penalty():
    r = apply_pessimistic_penalty([-1.0, -2.0], [True, False], 5.0)
    assert r.tolist() == [-6.0, -2.0]
    assert apply_pessimistic_penalty([-1.0], [True], 0.0).tolist() == [-1.0]
    with pytest.raises(ValueError):
        apply_pessimistic_penalty([-1.0], [True, False], 1.0)


def test_replay_buffer_ring():
    buf = ReplayBuffer(3, 1, 1)
    for k in range(5):
        buf.add([[k]], [[0, 0]], [k], [[k]], [0])
    assert len(buf) == 3
    assert sorted(buf.obs[:, 0, 0].tolist()) == [2, 3, 4]
    with pytest.raises(ValueError):
        ReplayBuffer(2, 1, 1).sample(4, np.random.default_rng(0))


def test_bundle_checkpoint_roundtrip(bundle, tmp_path):
    save_bundle(bundle, tmp_path)
    back = load_bundle(tmp_path, "maddpg")
    for a, b in zip(bundle.actors + bundle.target_critics, back.actors + back.target_critics):
        assert a.flat().tobytes() == b.flat().tobytes()


def test_episode_reward_timing():
    """Intrinsic reward of step t uses the scores known before that step."""
    cfg = PhysicsConfig()
    model = pretrain_model(cfg, 0, episodes=10)
    spec = generate_scenario("hidden_obstacle", RngStream(1, 1))
    ep = Episode(spec, cfg, model, CcrConfig(), RngStream(1, 2))
    first = ep.step(np.ones((4, 2)))
    assert np.array_equal(first.intrinsic, np.zeros(4))  # all scores start at zero
    rng = np.random.default_rng(0)
    while not ep.done:
        prev = ep.scores.copy()
        rec = ep.step(rng.uniform(-1, 1, (4, 2)))
        if not prev.any():
            assert not rec.intrinsic.any()
    assert ep.world.step == cfg.episode_length and rec.done


SMALL = dict(episodes=6, warmup=64, batch_size=32, hidden=16, model_episodes=5)


def test_disabled_shaping_matches_plain_loop():
    cfg = TrainConfig(ccr=CcrConfig(enabled=False), seed=2, **SMALL)
    assert run_training(cfg, "turbulence").metrics_csv() == run_plain(cfg, "turbulence").metrics_csv()


def test_training_reproducible():
    cfg = TrainConfig(seed=4, **SMALL)
    a = run_training(cfg, "strong_wind")
    b = run_training(cfg, "strong_wind")
    assert a.metrics_csv() == b.metrics_csv()
    assert a.bundle.actors[0].flat().tobytes() == b.bundle.actors[0].flat().tobytes()


def test_penalty_changes_learning_only():
    base = run_training(TrainConfig(ccr=CcrConfig(enabled=False), seed=1, **SMALL), "hidden_obstacle")
    pen = run_training(TrainConfig(ccr=CcrConfig(enabled=False), pessimistic_penalty=5.0, seed=1,
                                   **SMALL), "hidden_obstacle")
    # identical until the first update, then policies diverge
    assert base.metrics[0] == pen.metrics[0]


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(gamma=1.0)
    with pytest.raises(ValueError):
        TrainConfig(algorithm="ppo")
