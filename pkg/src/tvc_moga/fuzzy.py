"""Fuzzy-PID control law: single-input engines, preferential engine, gain schedule.

Each PID channel (integral, proportional, derivative of the pitch error) is
normalized and mapped through its own single-input engine to a value in
[-1, 1].  The preferential engine maps ``|theta|`` to a regulation scalar
``delta_w`` that schedules all three gains affinely::

    K_hat = K_base + K_reg * delta_w
    u     = K_hat_i * f_i + K_hat_p * f_p + K_hat_d * f_d

All evaluation helpers accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .plant import InvalidParameterError


class CoverageError(ValueError):
    """Membership functions leave part of the universe uncovered."""


Shape = tuple[float, float, float]  # (left foot, peak, right foot)


@dataclass(frozen=True)
class MembershipTriple:
    """Three triangular sets; the outer two shoulder to membership 1 past their peaks."""

    labels: tuple[str, str, str]
    shapes: tuple[Shape, Shape, Shape]
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "shapes", tuple(tuple(float(v) for v in s) for s in self.shapes))
        if len(self.labels) != 3 or len(self.shapes) != 3:
            raise InvalidParameterError("a membership triple needs exactly three labels and shapes")
        if not self.lo < self.hi:
            raise InvalidParameterError(f"empty universe [{self.lo}, {self.hi}]")
        (l0, p0, r0), (l1, p1, r1), (l2, p2, r2) = self.shapes
        if not p0 < p1 < p2:
            raise InvalidParameterError(f"peaks must be strictly increasing, got {(p0, p1, p2)}")
        if not (p0 < r0 and l1 < p1 < r1 and l2 < p2):
            raise InvalidParameterError(f"degenerate triangle in {self.shapes}")
        # Open supports are (-inf, r0), (l1, r1), (l2, +inf): no gap iff neighbours overlap.
        if not (l1 < r0 and l2 < r1):
            raise CoverageError(f"membership supports leave a gap: {self.shapes}")

    @classmethod
    def evenly_spaced(cls, labels, lo: float, hi: float) -> "MembershipTriple":
        mid = 0.5 * (lo + hi)
        return cls(tuple(labels), ((lo, lo, mid), (lo, mid, hi), (mid, hi, hi)), lo, hi)

    @property
    def peaks(self) -> tuple[float, float, float]:
        return tuple(s[1] for s in self.shapes)

    def memberships(self, x):
        """Degrees of membership ``(mu_0, mu_1, mu_2)`` at ``x`` (clipped to the universe)."""
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        (_, p0, r0), (l1, p1, r1), (l2, p2, _) = self.shapes
        mu0 = np.where(x <= p0, 1.0, np.clip((r0 - x) / (r0 - p0), 0.0, 1.0))
        mu1 = np.clip(np.minimum((x - l1) / (p1 - l1), (r1 - x) / (r1 - p1)), 0.0, 1.0)
        mu2 = np.where(x >= p2, 1.0, np.clip((x - l2) / (p2 - l2), 0.0, 1.0))
        return mu0, mu1, mu2


def _weighted_mean(triple: MembershipTriple, consequents, x):
    mu = triple.memberships(x)
    den = mu[0] + mu[1] + mu[2]
    if np.any(den <= 0):
        raise CoverageError(f"zero membership mass at x={x!r}")
    num = mu[0] * consequents[0] + mu[1] * consequents[1] + mu[2] * consequents[2]
    out = num / den
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SifieRuleSet:
    memberships: MembershipTriple = field(
        default_factory=lambda: MembershipTriple(("NB", "Z", "PB"), ((-1.0, -1.0, 0.0), (-1.0, 0.0, 1.0), (0.0, 1.0, 1.0)), -1.0, 1.0)
    )
    consequents: tuple[float, float, float] = (1.0, 0.0, -1.0)


@dataclass(frozen=True)
class PfieRuleSet:
    memberships: MembershipTriple = field(
        default_factory=lambda: MembershipTriple.evenly_spaced(("DS", "DM", "DL"), 0.0, 0.2)
    )
    consequents: tuple[float, float, float] = (1.0, 0.5, 1.0)

    @classmethod
    def for_reference(cls, theta_ref: float) -> "PfieRuleSet":
        """Default rule set with peaks at ``(0, theta_ref/2, theta_ref)``."""
        return cls(MembershipTriple.evenly_spaced(("DS", "DM", "DL"), 0.0, theta_ref))


def sifie_output(x, rules: SifieRuleSet):
    """Fuzzy form of one normalized PID channel, in [-1, 1]."""
    return _weighted_mean(rules.memberships, rules.consequents, x)


def pfie_delta_w(theta_abs, rules: PfieRuleSet):
    """Gain regulation scalar ``delta_w`` from the pitch-error magnitude."""
    if np.any(np.asarray(theta_abs) < 0):
        raise InvalidParameterError("theta_abs must be non-negative")
    return _weighted_mean(rules.memberships, rules.consequents, theta_abs)


def dynamic_importance(w, B, delta_w):
    """Dynamic importance degree ``w + B * delta_w``."""
    return w + B * delta_w


@dataclass(frozen=True)
class GainSchedule:
    """Six design variables: base and regulation gains, ordered (i, p, d)."""

    base: tuple[float, float, float]
    regulation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(float(v) for v in self.base))
        object.__setattr__(self, "regulation", tuple(float(v) for v in self.regulation))
        if len(self.base) != 3 or len(self.regulation) != 3:
            raise InvalidParameterError("base and regulation need three gains each")
        if not all(math.isfinite(v) for v in self.base + self.regulation):
            raise InvalidParameterError(f"non-finite gain in {self!r}")

    @classmethod
    def from_genome(cls, genes: Sequence[float]) -> "GainSchedule":
        genes = [float(v) for v in genes]
        if len(genes) != 6:
            raise InvalidParameterError(f"a gain genome has 6 genes, got {len(genes)}")
        return cls(tuple(genes[:3]), tuple(genes[3:]))

    def to_genome(self) -> np.ndarray:
        return np.array(self.base + self.regulation)


def schedule_gains(g: GainSchedule, delta_w):
    """Scheduled ``(K_i, K_p, K_d)``."""
    return tuple(kb + kr * delta_w for kb, kr in zip(g.base, g.regulation))


@dataclass(frozen=True)
class ControllerState:
    integral: float = 0.0  # rad s
    input_scales: tuple[float, float, float] = (1.0, 0.2, 1.0)  # (integral, theta, theta_dot)
    integral_clamp: float = math.inf

    def __post_init__(self):
        if any(not s > 0 for s in self.input_scales):
            raise InvalidParameterError(f"input scales must be positive, got {self.input_scales}")
        if not self.integral_clamp > 0:
            raise InvalidParameterError("integral_clamp must be positive")


def fuzzy_forms(integral, theta, theta_dot, scales, sifie: Sequence[SifieRuleSet]):
    """Per-channel single-input engine outputs for (integral, theta, theta_dot)."""
    return tuple(
        sifie_output(np.asarray(v, dtype=float) / s, r)
        for v, s, r in zip((integral, theta, theta_dot), scales, sifie)
    )


def control_action(
    cs: ControllerState,
    theta: float,
    theta_dot: float,
    g: GainSchedule,
    sifie: Sequence[SifieRuleSet],
    pfie: PfieRuleSet,
) -> float:
    """Raw fuzzy-PID output (``u_t`` before gimbal saturation)."""
    f_i, f_p, f_d = fuzzy_forms(cs.integral, theta, theta_dot, cs.input_scales, sifie)
    k_i, k_p, k_d = schedule_gains(g, pfie_delta_w(abs(theta), pfie))
    return k_i * f_i + k_p * f_p + k_d * f_d


def integrate_error(cs: ControllerState, theta_prev: float, theta: float, dt: float) -> ControllerState:
    """Trapezoidal update of the error integral, clamped for anti-windup."""
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt!r}")
    acc = cs.integral + 0.5 * (theta_prev + theta) * dt
    return replace(cs, integral=min(max(acc, -cs.integral_clamp), cs.integral_clamp))
