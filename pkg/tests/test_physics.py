import numpy as np
import pytest

from ccrsim.core import Action, RngStream, RobotState, vec2
from ccrsim.physics import (PhysicsConfig, Rect, initial_world, integrate, resolve_obstacle,
                            step_world)
from ccrsim.scenarios import ScenarioKind, ScenarioParams, generate_scenario

UNIT = PhysicsConfig(dt=0.1, damping=0.25, max_speed=1.0, accel_scale=1.0)


def state(p, v):
    return RobotState(vec2(*p), vec2(*v))


def test_rest_stays_at_rest():
    out = integrate(state((0.3, -0.2), (0, 0)), Action(vec2(0, 0)), vec2(0, 0), UNIT)
    assert np.array_equal(out.position, [0.3, -0.2])
    assert np.array_equal(out.velocity, [0, 0])


def test_damped_drift():
    out = integrate(state((0, 0), (1, 0)), Action(vec2(0, 0)), vec2(0, 0), UNIT)
    assert out.velocity == pytest.approx([0.75, 0.0], abs=1e-15)
    assert out.position == pytest.approx([0.075, 0.0], abs=1e-15)


def test_unit_acceleration():
    out = integrate(state((0, 0), (0, 0)), Action(vec2(1, 0)), vec2(0, 0), UNIT)
    assert out.velocity == pytest.approx([0.1, 0.0], abs=1e-15)
    assert out.position == pytest.approx([0.01, 0.0], abs=1e-15)


def test_accel_scale_multiplies_action_only():
    cfg = PhysicsConfig(accel_scale=3.0)
    out = integrate(state((0, 0), (0, 0)), Action(vec2(1, 0)), vec2(0, 0.5), cfg)
    assert out.velocity == pytest.approx([0.3, 0.05], abs=1e-15)


def test_speed_clamp():
    out = integrate(state((0, 0), (0.9, 0.9)), Action(vec2(1, 1)), vec2(0, 0), UNIT)
    assert np.hypot(*out.velocity) == pytest.approx(1.0, abs=1e-12)


def test_non_finite_input_faults():
    with pytest.raises(FloatingPointError):
        integrate(state((np.nan, 0), (0, 0)), Action(vec2(0, 0)), vec2(0, 0), UNIT)


RECT = Rect(vec2(1, -1), vec2(2, 1))


def test_resolve_outside_unchanged():
    after = state((0.5, 0), (1, 0))
    out, hit = resolve_obstacle(state((0.4, 0), (1, 0)), after, RECT)
    assert not hit and out is after


def test_resolve_projects_to_entry_face():
    out, hit = resolve_obstacle(state((0.9, 0), (1, 0)), state((1.05, 0), (1, 0.2)), RECT)
    assert hit
    assert np.array_equal(out.position, [1.0, 0.0])
    assert np.array_equal(out.velocity, [0.0, 0.2])


def test_resolve_boundary_is_not_collision():
    _, hit = resolve_obstacle(state((0.9, 0), (1, 0)), state((1.0, 0), (1, 0)), RECT)
    assert not hit


def test_resolve_corner_entry_uses_last_crossed_face():
    # crosses y = -1 (t = 0.5) after x = 1 (t = 0.25): bottom face
    out, hit = resolve_obstacle(state((0.9, -1.1), (0, 0)), state((1.3, -0.9), (1, 1)), RECT)
    assert hit
    assert np.array_equal(out.position, [1.3, -1.0])
    assert np.array_equal(out.velocity, [1.0, 0.0])


def _world(positions, velocities=None, seed=0):
    w = initial_world(positions, RngStream(seed, 2))
    if velocities is not None:
        w = type(w)(w.positions, np.array(velocities, float), 0, w.episode_rng)
    return w


def test_step_world_length_mismatch():
    w = _world([[0, 0], [1, 1]])
    with pytest.raises(ValueError):
        step_world(w, [Action(vec2(0, 0))], None, PhysicsConfig())


def test_step_world_safe_robots_drift_only():
    spec = generate_scenario("strong_wind", RngStream(1, 1))
    w = _world([[-1.5, 1.5], [-1.5, -1.5]], [[0.5, 0], [0, 0.5]])
    nxt, info = step_world(w, np.zeros((2, 2)), spec, PhysicsConfig())
    assert np.allclose(nxt.velocities, 0.75 * w.velocities)
    assert not info.in_danger.any() and not info.collided.any()


def test_wind_superposition():
    spec = generate_scenario("strong_wind", RngStream(1, 1),
                             ScenarioParams(wind_force=(0.5, 0.0)))
    inside = spec.danger.center
    w = _world([inside, [-1.5, 1.5]])
    cfg = PhysicsConfig()
    nxt, info = step_world(w, np.zeros((2, 2)), spec, cfg)
    calm, _ = step_world(w, np.zeros((2, 2)), None, cfg)
    assert nxt.velocities[0] - calm.velocities[0] == pytest.approx([0.5 * cfg.dt, 0.0])
    assert np.array_equal(nxt.velocities[1], calm.velocities[1])
    assert info.in_danger.tolist() == [True, False]


def test_step_world_obstacle_matches_resolve_oracle():
    spec = generate_scenario("hidden_obstacle", RngStream(3, 1))
    rect = spec.obstacle
    cfg = PhysicsConfig()
    start = [rect.lo[0] - 0.05, rect.center[1]]
    w = _world([start], [[1.0, 0.1]])
    nxt, info = step_world(w, np.array([[1.0, 0.0]]), spec, cfg)
    free = integrate(w.robot(0), Action(vec2(1.0, 0.0)), vec2(0, 0), cfg)
    oracle, hit = resolve_obstacle(w.robot(0), free, rect)
    assert hit and info.collided[0] and info.in_danger[0]
    assert np.array_equal(nxt.positions[0], oracle.position)
    assert np.array_equal(nxt.velocities[0], oracle.velocity)
    assert nxt.positions[0, 0] == rect.lo[0]


def test_step_world_deterministic():
    spec = generate_scenario("turbulence", RngStream(9, 1))
    w = _world([spec.danger.center, [-1, 0]])
    acts = np.array([[0.2, -0.4], [1.0, 1.0]])
    a, _ = step_world(w, acts, spec, PhysicsConfig())
    b, _ = step_world(w, acts, spec, PhysicsConfig())
    assert a.positions.tobytes() == b.positions.tobytes()
    assert a.velocities.tobytes() == b.velocities.tobytes()


def test_zero_input_geometric_decay():
    cfg = PhysicsConfig()
    w = _world([[0, 0]], [[0.8, -0.6]])
    for _ in range(20):
        nxt, _ = step_world(w, np.zeros((1, 2)), None, cfg)
        ratio = np.hypot(*nxt.velocities[0]) / np.hypot(*w.velocities[0])
        assert ratio == pytest.approx(1 - cfg.damping, rel=1e-12)
        w = nxt


def test_randomized_obstacle_and_speed_invariants():
    """Short version of the acceptance sweep."""
    cfg = PhysicsConfig()
    rng = np.random.default_rng(0)
    for ep in range(20):
        spec = generate_scenario(ScenarioKind.HIDDEN_OBSTACLE, RngStream(ep, 1))
        w = _world(spec.spawn_positions)
        for _ in range(35):
            w, _ = step_world(w, rng.uniform(-1, 1, (4, 2)) + [0.6, 0], spec, cfg)
            assert not spec.obstacle.interior(w.positions).any()
            assert (np.hypot(w.velocities[:, 0], w.velocities[:, 1]) <= cfg.max_speed + 1e-12).all()
