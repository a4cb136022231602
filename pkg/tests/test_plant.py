import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvc_moga.plant import (
    ActuatorCommand,
    InvalidParameterError,
    PlantParams,
    SingularityError,
    State,
    derive_b,
    rk4_step,
    state_derivative,
    thrust_magnitude,
)

finite = st.floats(-10, 10, allow_nan=False)


def analytic(theta0, omega0, acc, t):
    return theta0 + omega0 * t + 0.5 * acc * t * t, omega0 + acc * t


def test_derive_b_examples():
    assert derive_b(1, 2, 1, 0, 9.81) == pytest.approx(-9.81, rel=1e-15)
    # hand arithmetic: -50 * 2 * 29.81 / 120
    assert derive_b(50, 2, 60, 20, 9.81) == pytest.approx(-24.841666666666665, rel=1e-15)
    with pytest.raises(InvalidParameterError):
        derive_b(0, 2, 1, 0)
    with pytest.raises(InvalidParameterError):
        derive_b(1, 2, -1, 0)


def test_plant_params_b_matches_formula():
    p = PlantParams()
    assert p.b < 0
    assert p.b == pytest.approx(-p.m * p.l * (p.a + p.g) / (2 * p.I), rel=1e-12)


def test_derive_b_homogeneous():
    assert derive_b(100, 2, 120, 20) == pytest.approx(derive_b(50, 2, 60, 20), rel=1e-15)


def test_state_derivative():
    assert state_derivative(State(0, 0), 0.0, -3.0) == (0, 0)
    assert state_derivative(State(0.3, 0.1), 0.5, 2.0) == (0.1, 1.0)
    with pytest.raises(FloatingPointError):
        state_derivative(State(0, 0), math.nan, 1.0)


@given(finite, finite, st.floats(-5, 5), st.floats(-5, 5))
def test_state_derivative_linear_in_u(th, om, u, alpha):
    _, base = state_derivative(State(th, om), u, -2.5)
    _, scaled = state_derivative(State(th, om), alpha * u, -2.5)
    assert scaled == pytest.approx(alpha * base, rel=1e-15, abs=1e-300)


def test_thrust_magnitude():
    p = PlantParams(m=1, a=0.19, g=9.81)
    assert thrust_magnitude(p, 0, 0) == pytest.approx(10.0, rel=1e-15)
    q = PlantParams()
    assert thrust_magnitude(q, 0, 0) == q.m * (q.a + q.g)
    assert thrust_magnitude(q, 0.2, -0.1) == thrust_magnitude(q, -0.2, 0.1)
    with pytest.raises(SingularityError):
        thrust_magnitude(q, math.pi / 2, 0)


def test_thrust_balances_vertical_force():
    # -m g + F cos(phi) cos(theta) = m a
    p = PlantParams()
    F = thrust_magnitude(p, 0.25, 0.1)
    assert -p.m * p.g + F * math.cos(0.25) * math.cos(0.1) == pytest.approx(p.m * p.a, rel=1e-12)


def test_actuator_command_saturates():
    cmd = ActuatorCommand.from_control(10.0, phi_max=0.26)
    assert cmd.phi == 0.26
    assert cmd.u_t == pytest.approx(math.tan(0.26), abs=1e-12)
    with pytest.raises(InvalidParameterError):
        ActuatorCommand(phi=0.3, phi_max=0.26)


def test_rk4_examples():
    s = rk4_step(State(0.4, 0.0), 0.0, -24.8, 0.1)
    assert (s.theta, s.theta_dot) == (0.4, 0.0)
    s = rk4_step(State(0, 0), 1.0, 1.0, 0.1)
    assert s.theta == pytest.approx(0.005, rel=1e-12)
    assert s.theta_dot == pytest.approx(0.1, rel=1e-12)
    two = rk4_step(rk4_step(State(0.1, -0.2), 0.3, -5.0, 0.05), 0.3, -5.0, 0.05)
    one = rk4_step(State(0.1, -0.2), 0.3, -5.0, 0.1)
    assert two.theta == pytest.approx(one.theta, abs=1e-12)
    assert two.theta_dot == pytest.approx(one.theta_dot, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        rk4_step(State(0, 0), 0.0, 1.0, 0.0)


def test_constant_input_matches_double_integrator_over_unit_time():
    s = State(0.2, 0.3)
    for _ in range(10):
        s = rk4_step(s, 0.5, -4.0, 0.1)
    # theta(1) = theta0 + omega0 + b u / 2
    assert s.theta == pytest.approx(0.2 + 0.3 - 4.0 * 0.5 / 2, rel=1e-12)


@settings(max_examples=200)
@given(finite, finite, st.floats(-1, 1), st.floats(-30, 30), st.integers(1, 50))
def test_rk4_exact_for_constant_input(th, om, u, b, n):
    dt = 0.01
    s = State(th, om)
    for _ in range(n):
        s = rk4_step(s, u, b, dt)
    th_ref, om_ref = analytic(th, om, b * u, n * dt)
    assert s.theta == pytest.approx(th_ref, rel=1e-12, abs=1e-12)
    assert s.theta_dot == pytest.approx(om_ref, rel=1e-12, abs=1e-12)
