import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccrsim.core import Action, RngStream, RobotState, norm2, squared_distance, vec2

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("v, expected", [((3, 4), 5.0), ((0, 0), 0.0), ((1, 1), math.sqrt(2))])
def test_norm2(v, expected):
    assert norm2(v) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("a, b, expected", [
    ((0, 0), (3, 4), 25.0),
    ((2, 2), (2, 2), 0.0),
    ((-1, 0), (1, 0), 4.0),
])
def test_squared_distance(a, b, expected):
    assert squared_distance(a, b) == expected


@given(finite, finite, finite, finite)
def test_squared_distance_symmetric(ax, ay, bx, by):
    assert squared_distance((ax, ay), (bx, by)) == squared_distance((bx, by), (ax, ay))


@given(finite, finite)
def test_norm_matches_distance_to_origin(x, y):
    n = norm2((x, y))
    d = squared_distance((x, y), (0.0, 0.0))
    assert n * n == pytest.approx(d, rel=1e-12, abs=1e-300)


def test_rng_stream_reproducible():
    a = RngStream(1234, 7).generator().random(10_000)
    b = RngStream(1234, 7).generator().random(10_000)
    assert np.array_equal(a, b)


def test_rng_streams_are_distinct():
    a = RngStream(1234, 7).generator().random(100)
    assert not np.array_equal(a, RngStream(1234, 8).generator().random(100))
    assert not np.array_equal(a, RngStream(1235, 7).generator().random(100))
    assert not np.array_equal(a, RngStream(1234, 7).child(0).generator().random(100))


def test_child_streams_independent_of_consumption_order():
    base = RngStream(5, 1)
    first = base.child(3).generator().random(5)
    base.child(1).generator().random(1000)
    assert np.array_equal(first, base.child(3).generator().random(5))


def test_action_clamped():
    assert np.array_equal(Action(vec2(2.0, -3.0)).accel, [1.0, -1.0])


def test_robot_state_vector_roundtrip():
    s = RobotState(vec2(1, 2), vec2(3, 4))
    assert np.array_equal(RobotState.from_vector(s.as_vector()).as_vector(), [1, 2, 3, 4])
