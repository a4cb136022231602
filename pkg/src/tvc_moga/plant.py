"""Pitch-channel dynamics of the CanSat carrier.

The carrier is modelled as a rigid body gimballing its thrust by ``phi``
relative to the centerline.  Under the small-angle assumption the pitch
channel reduces to a double integrator::

    theta_ddot = b * u_t,   u_t = tan(phi),   b = -m * l * (a + g) / (2 * I)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SINGULARITY_TOL = 1e-9


class InvalidParameterError(ValueError):
    """A physical or numerical parameter is outside its admissible range."""


class SingularityError(ArithmeticError):
    """Thrust magnitude is undefined (a projection cosine vanished)."""


def derive_b(m: float, l: float, I: float, a: float, g: float = 9.81) -> float:
    """Control effectiveness of the gimbal angle on pitch acceleration (1/s^2)."""
    for name, value in (("m", m), ("l", l), ("I", I)):
        if not value > 0:
            raise InvalidParameterError(f"{name} must be positive, got {value!r}")
    if not a + g > 0:
        raise InvalidParameterError(f"a + g must be positive, got {a + g!r}")
    return -m * l * (a + g) / (2.0 * I)


@dataclass(frozen=True)
class PlantParams:
    m: float = 50.0  # kg
    l: float = 2.0  # m
    I: float = 60.0  # kg m^2
    a: float = 20.0  # commanded vertical acceleration, m/s^2
    g: float = 9.81  # m/s^2
    b: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "b", derive_b(self.m, self.l, self.I, self.a, self.g))


@dataclass(frozen=True)
class State:
    theta: float
    theta_dot: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.theta_dot)):
            raise FloatingPointError(f"non-finite state {self!r}")


@dataclass(frozen=True)
class ActuatorCommand:
    """Gimbal command; ``u_t = tan(phi)`` with ``|phi| <= phi_max``."""

    phi: float
    phi_max: float = 0.26
    u_t: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.phi_max < math.pi / 2:
            raise InvalidParameterError(f"phi_max must lie in (0, pi/2), got {self.phi_max!r}")
        if abs(self.phi) > self.phi_max:
            raise InvalidParameterError(f"|phi|={abs(self.phi)!r} exceeds phi_max={self.phi_max!r}")
        object.__setattr__(self, "u_t", math.tan(self.phi))

    @classmethod
    def from_control(cls, u: float, phi_max: float = 0.26) -> "ActuatorCommand":
        """Saturate a raw control output ``u`` (read as ``tan(phi)``) to the gimbal limit."""
        phi = min(max(math.atan(u), -phi_max), phi_max)
        return cls(phi=phi, phi_max=phi_max)


def thrust_magnitude(params: PlantParams, phi: float, theta: float) -> float:
    """Thrust needed to hold the commanded vertical acceleration (N).

    Solves ``-m g + F cos(phi) cos(theta) = m a`` for ``F``.
    """
    c_phi, c_theta = math.cos(phi), math.cos(theta)
    if c_phi <= SINGULARITY_TOL or c_theta <= SINGULARITY_TOL:
        raise SingularityError(f"cos(phi)={c_phi!r}, cos(theta)={c_theta!r}")
    return params.m * (params.a + params.g) / (c_phi * c_theta)


def state_derivative(s: State, u_t: float, b: float) -> tuple[float, float]:
    """Right-hand side ``(theta_dot, b * u_t)``."""
    if not (math.isfinite(u_t) and math.isfinite(b)):
        raise FloatingPointError(f"non-finite input u_t={u_t!r}, b={b!r}")
    return s.theta_dot, b * u_t


def rk4_step(s: State, u_t: float, b: float, dt: float) -> State:
    """Classical RK4 step with ``u_t`` held constant over the step."""
    th, om = rk4_step_arrays(s.theta, s.theta_dot, u_t, b, dt)
    return State(float(th), float(om))


def rk4_step_arrays(theta, theta_dot, u_t, b: float, dt: float):
    """Array form of :func:`rk4_step`, elementwise over a batch of states."""
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt!r}")
    acc = np.multiply(b, u_t)
    # Stage derivatives of (theta, theta_dot); acceleration is constant under ZOH.
    k1 = theta_dot
    k2 = theta_dot + 0.5 * dt * acc
    k3 = theta_dot + 0.5 * dt * acc
    k4 = theta_dot + dt * acc
    theta_next = theta + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    theta_dot_next = theta_dot + dt / 6.0 * (acc + 2.0 * acc + 2.0 * acc + acc)
    return theta_next, theta_dot_next
