import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvetrak.controller import (ControllerParams, agent_velocities, formation_frame, measure_center,
                                  sgn, vel_n, vel_q)
from curvetrak.errors import DegenerateFrameError

P = ControllerParams(k1=1, k2=0.9, C=1, a=0.01, epsilon=2, d0=2, z_d=2)
coord = st.floats(-1e3, 1e3)


def test_sgn():
    assert sgn(-3) == -1
    assert sgn(0) == 0
    assert sgn(2.5) == 1
    assert sgn(0.005, 0.01) == 0
    assert sgn(-0.02, 0.01) == -1


def test_formation_frame():
    f = formation_frame((0, 0), (2, 0))
    np.testing.assert_array_equal(f.q, [1, 0])
    np.testing.assert_array_equal(f.n, [0, 1])
    f = formation_frame((1, 1), (1, 3))
    np.testing.assert_array_equal(f.q, [0, 1])
    np.testing.assert_array_equal(f.n, [-1, 0])
    with pytest.raises(DegenerateFrameError):
        formation_frame((5, 5), (5, 5))


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord)
def test_frame_is_right_handed_orthonormal(x1, y1, x2, y2):
    if math.hypot(x2 - x1, y2 - y1) < 1e-6:
        return
    f = formation_frame((x1, y1), (x2, y2))
    assert f.q @ f.q == pytest.approx(1, abs=1e-12)
    assert f.n @ f.n == pytest.approx(1, abs=1e-12)
    assert f.q @ f.n == pytest.approx(0, abs=1e-12)
    assert f.q[0] * f.n[1] - f.q[1] * f.n[0] == pytest.approx(1, abs=1e-12)


def test_measure_center():
    assert measure_center(5, 3) == 4
    assert measure_center(500.2, 499.8) == pytest.approx(500.0, abs=1e-12)
    assert measure_center(7.25, 7.25) == 7.25


def test_vel_q_examples():
    assert vel_q(1, (0, 0), (2, 0), 5, 3, P) == pytest.approx(0.9)
    assert vel_q(1, (0, 0), (2, 0), 3, 5, P) == pytest.approx(-0.9)
    assert vel_q(1, (0, 0), (3, 0), 4, 4, P) == pytest.approx(1)
    assert vel_q(2, (0, 0), (3, 0), 4, 4, P) == pytest.approx(-1)
    with pytest.raises(ValueError):
        vel_q(3, (0, 0), (3, 0), 4, 4, P)


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord, st.floats(-100, 100), st.floats(-100, 100))
def test_center_q_velocity_is_the_signum_drive(x1, y1, x2, y2, m1, m2):
    # the formation terms cancel in the mean, leaving k2 * sgn(...)
    if math.hypot(x2 - x1, y2 - y1) < 1e-6:
        return
    r1, r2 = (x1, y1), (x2, y2)
    mean = 0.5 * (vel_q(1, r1, r2, m1, m2, P) + vel_q(2, r1, r2, m1, m2, P))
    drive = P.k2 * sgn((measure_center(m1, m2) - P.z_d) * (m1 - m2))
    assert mean == pytest.approx(drive, abs=1e-9 * (1 + abs(x1) + abs(x2) + abs(y1) + abs(y2)))


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord, st.floats(-100, 100), st.floats(-100, 100))
def test_relabelling_agents_is_consistent(x1, y1, x2, y2, m1, m2):
    if math.hypot(x2 - x1, y2 - y1) < 1e-6:
        return
    v1, v2 = agent_velocities((x1, y1), (x2, y2), m1, m2, P)
    w2, w1 = agent_velocities((x2, y2), (x1, y1), m2, m1, P)
    # relabelling turns the body frame by pi: each agent keeps its forward speed
    # along its own n, and its q-component flips sign with q
    f, g = formation_frame((x1, y1), (x2, y2)), formation_frame((x2, y2), (x1, y1))
    tol = 1e-9 * (1 + abs(x1) + abs(x2) + abs(y1) + abs(y2))
    for v, w in ((v1, w1), (v2, w2)):
        assert w @ g.q == pytest.approx(-(v @ f.q), abs=tol)
        assert w @ g.n == pytest.approx(v @ f.n, abs=tol)


def test_vel_n_gate():
    p = ControllerParams(k1=1, k2=0.99, C=1, a=1, epsilon=0.01, d0=0.2, z_d=2)
    assert vel_n(2.004, 2.005, p) == pytest.approx(3.004)
    assert vel_n(2.0, 4.0, P) == 0.0  # y_c = z_d + epsilon: boundary is closed
    assert vel_n(2.0, 1e6, p) == 0.0


def test_agent_velocities_examples():
    q = np.array([1.0, 0.0])
    # gate closed, y1 > y2, y_c > z_d, at rest separation: pure translation along q
    v1, v2 = agent_velocities((0, 0), (2, 0), 10, 8, P)
    np.testing.assert_allclose(v1, 0.9 * q)
    np.testing.assert_allclose(v2, 0.9 * q)
    # gate open, equal readings: pure forward motion
    v1, v2 = agent_velocities((0, 0), (2, 0), 2.5, 2.5, P)
    np.testing.assert_allclose(v1, [0, 1.025])
    np.testing.assert_allclose(v2, [0, 1.025])
    # gate open, y1 > y2: agent 1 is faster, the pair turns clockwise
    v1, v2 = agent_velocities((0, 0), (2, 0), 3, 1.5, P)
    assert v1[1] > v2[1]
    assert (v2[1] - v1[1]) / 2 < 0


def test_params_validation():
    with pytest.raises(ValueError, match="k1"):
        ControllerParams(k1=0, k2=1, C=1, a=1, epsilon=1, d0=1, z_d=0)
    with pytest.raises(ValueError, match="deadband"):
        ControllerParams(k1=1, k2=1, C=1, a=1, epsilon=1, d0=1, z_d=0, sgn_deadband=1)
