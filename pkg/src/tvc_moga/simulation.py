"""Closed-loop rollout of the carrier under fuzzy-PID control, and its objectives.

The rollout is written over a batch of genomes so that a whole GA population
advances through time together; a single-genome rollout is the batch of one.
Every operation in the loop is elementwise, so each member's trajectory does
not depend on what else is in the batch.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .fuzzy import (
    GainSchedule,
    PfieRuleSet,
    SifieRuleSet,
    dynamic_importance,
    fuzzy_forms,
    pfie_delta_w,
)
from .plant import InvalidParameterError, PlantParams, rk4_step_arrays

TRAJECTORY_COLUMNS = ("t", "theta", "theta_dot", "phi", "u_t", "delta_w", "K_i", "K_p", "K_d")
DIVERGENCE_LIMIT = 1e3  # rad
PENALTY = 1e6


def _default_sifie():
    return (SifieRuleSet(), SifieRuleSet(), SifieRuleSet())


@dataclass(frozen=True)
class ControllerConfig:
    """Fuzzy-PID settings.  ``None`` fields are derived from the initial condition."""

    sifie: tuple[SifieRuleSet, SifieRuleSet, SifieRuleSet] = field(default_factory=_default_sifie)
    pfie: PfieRuleSet | None = None
    input_scales: tuple[float, float, float] | None = None
    integral_clamp: float | None = None
    importance: tuple[float, float, float] = (1.0, 1.0, 1.0)
    regulation_coeff: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SimConfig:
    theta0: float = 0.2  # rad
    theta_dot0: float = 0.0  # rad/s
    T: float = 10.0  # s
    dt: float = 0.01  # s
    plant: PlantParams = field(default_factory=PlantParams)
    phi_max: float = 0.26  # rad
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    penalty: float = PENALTY

    def __post_init__(self):
        if not (math.isfinite(self.theta0) and math.isfinite(self.theta_dot0)):
            raise InvalidParameterError("initial state must be finite")
        if not self.T > 0:
            raise InvalidParameterError(f"T must be positive, got {self.T!r}")
        if not 0 < self.dt <= self.T:
            raise InvalidParameterError(f"dt must lie in (0, T], got {self.dt!r}")
        if not 0 < self.phi_max < math.pi / 2:
            raise InvalidParameterError(f"phi_max must lie in (0, pi/2), got {self.phi_max!r}")

    @property
    def n_steps(self) -> int:
        ratio = self.T / self.dt
        n = round(ratio)
        return n if abs(ratio - n) <= 1e-9 * max(1.0, ratio) else math.floor(ratio)

    @property
    def theta_ref(self) -> float:
        # theta0 = 0 would collapse the default universes; fall back to the stock 0.2 rad.
        return abs(self.theta0) if self.theta0 != 0 else 0.2

    def resolved(self):
        """Concrete (sifie, pfie, scales, clamp) with derived defaults filled in."""
        c = self.controller
        pfie = c.pfie if c.pfie is not None else PfieRuleSet.for_reference(self.theta_ref)
        scales = c.input_scales if c.input_scales is not None else (1.0, self.theta_ref, 1.0)
        if any(not s > 0 for s in scales):
            raise InvalidParameterError(f"input scales must be positive, got {scales}")
        clamp = c.integral_clamp if c.integral_clamp is not None else 10.0 * self.theta_ref * self.T
        if not clamp > 0:
            raise InvalidParameterError("integral_clamp must be positive")
        return c.sifie, pfie, tuple(scales), clamp


@dataclass
class Trajectory:
    t: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    phi: np.ndarray
    u_t: np.ndarray
    delta_w: np.ndarray
    gains: np.ndarray  # (n, 3) scheduled K_i, K_p, K_d
    importance: np.ndarray | None = None  # (n, 3) dynamic importance degrees, diagnostic only
    diverged: bool = False

    def __len__(self):
        return len(self.t)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        cols = (self.t, self.theta, self.theta_dot, self.phi, self.u_t, self.delta_w, *self.gains.T)
        for row in zip(*cols):
            w.writerow([format(float(v), ".17g") for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> "Trajectory":
        text = Path(source).read_text() if not str(source).startswith("t,") else str(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != TRAJECTORY_COLUMNS:
            raise ValueError(f"not a trajectory CSV; expected header {','.join(TRAJECTORY_COLUMNS)}")
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(TRAJECTORY_COLUMNS))
        return cls(*(data[:, i] for i in range(6)), gains=data[:, 6:9].copy())


@dataclass(frozen=True)
class ObjectivePair:
    of1: float  # integral of |theta| dt, rad s
    of2: float  # integral of |phi| dt, rad s

    def __iter__(self):
        yield self.of1
        yield self.of2


def _simulate(genomes, cfg: SimConfig, record: bool):
    """Advance a batch of closed loops.

    Returns ``(of1, of2, diverged, records)``; ``records`` is None unless
    ``record`` is set, in which case it maps each signal to a (samples, n) array.
    Samples stop at the last finite state if every member has diverged.
    """
    genomes = np.atleast_2d(np.asarray(genomes, dtype=float))
    if genomes.ndim != 2 or genomes.shape[1] != 6:
        raise InvalidParameterError(f"genomes must have 6 columns, got shape {genomes.shape}")
    if not np.all(np.isfinite(genomes)):
        raise InvalidParameterError("non-finite gain in genome batch")
    n = genomes.shape[0]
    sifie, pfie, scales, clamp = cfg.resolved()
    base, reg = genomes[:, :3], genomes[:, 3:]
    b, dt, phi_max = cfg.plant.b, cfg.dt, cfg.phi_max
    half_dt = 0.5 * dt

    def control(theta, omega, integral):
        f_i, f_p, f_d = fuzzy_forms(integral, theta, omega, scales, sifie)
        dw = np.asarray(pfie_delta_w(np.abs(theta), pfie), dtype=float)
        k = base + reg * dw[:, None]
        u = k[:, 0] * f_i + k[:, 1] * f_p + k[:, 2] * f_d
        phi = np.clip(np.arctan(u), -phi_max, phi_max)
        return phi, np.tan(phi), dw, k

    theta = np.full(n, float(cfg.theta0))
    omega = np.full(n, float(cfg.theta_dot0))
    integral = np.zeros(n)
    phi, u_t, dw, k = control(theta, omega, integral)
    of1 = np.zeros(n)
    of2 = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    rec = {key: [] for key in ("theta", "theta_dot", "phi", "u_t", "delta_w", "gains")} if record else None

    for _ in range(cfg.n_steps):
        if record:
            for key, val in zip(rec, (theta, omega, phi, u_t, dw, k)):
                rec[key].append(val)
        th_next, om_next = rk4_step_arrays(theta, omega, u_t, b, dt)
        alive = alive & (np.abs(th_next) <= DIVERGENCE_LIMIT)
        if not alive.any():
            break
        int_next = np.clip(integral + (theta + th_next) * half_dt, -clamp, clamp)
        phi_next, u_t, dw, k = control(th_next, om_next, int_next)
        of1 = of1 + (np.abs(theta) + np.abs(th_next)) * half_dt
        of2 = of2 + (np.abs(phi) + np.abs(phi_next)) * half_dt
        # Diverged members are frozen at their last finite state.
        theta = np.where(alive, th_next, theta)
        omega = np.where(alive, om_next, omega)
        integral = np.where(alive, int_next, integral)
        phi = phi_next
    else:
        if record:
            for key, val in zip(rec, (theta, omega, phi, u_t, dw, k)):
                rec[key].append(val)
    if record:
        rec = {key: np.array(vals) for key, vals in rec.items()}
    return of1, of2, ~alive, rec


def rollout(g: GainSchedule | Sequence[float], cfg: SimConfig) -> Trajectory:
    """Closed-loop trajectory of a single gain schedule."""
    genome = g.to_genome() if isinstance(g, GainSchedule) else np.asarray(g, dtype=float)
    _, _, diverged, rec = _simulate(genome[None, :], cfg, record=True)
    m = len(rec["theta"])
    dw = rec["delta_w"][:, 0]
    w = np.asarray(cfg.controller.importance, dtype=float)
    B = np.asarray(cfg.controller.regulation_coeff, dtype=float)
    return Trajectory(
        t=np.arange(m) * cfg.dt,
        theta=rec["theta"][:, 0],
        theta_dot=rec["theta_dot"][:, 0],
        phi=rec["phi"][:, 0],
        u_t=rec["u_t"][:, 0],
        delta_w=dw,
        gains=rec["gains"][:, 0, :],
        importance=dynamic_importance(w[None, :], B[None, :], dw[:, None]),
        diverged=bool(diverged[0]),
    )


def _trapezoid(y: np.ndarray, dt: float) -> float:
    # Sequential accumulation, same operation order as the batched rollout.
    acc = 0.0
    half_dt = 0.5 * dt
    for a, b in zip(y[:-1], y[1:]):
        acc = acc + (a + b) * half_dt
    return float(acc)


def objectives(traj: Trajectory) -> ObjectivePair:
    """Trapezoidal integrals of ``|theta|`` and ``|phi|`` over the trajectory."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    dt = traj.dt
    return ObjectivePair(_trapezoid(np.abs(traj.theta), dt), _trapezoid(np.abs(traj.phi), dt))


def evaluate_batch(genomes, cfg: SimConfig) -> np.ndarray:
    """Objective pairs for a batch of genomes as an (n, 2) array; divergence scores the penalty."""
    of1, of2, diverged, _ = _simulate(genomes, cfg, record=False)
    out = np.stack([of1, of2], axis=1)
    out[diverged] = cfg.penalty
    return out


def evaluate(g: GainSchedule | Sequence[float], cfg: SimConfig) -> ObjectivePair:
    genome = g.to_genome() if isinstance(g, GainSchedule) else np.asarray(g, dtype=float)
    of1, of2 = evaluate_batch(genome[None, :], cfg)[0]
    return ObjectivePair(float(of1), float(of2))


class ControllerFitness:
    """Picklable vectorized fitness: (n, 6) genomes -> (n, 2) objectives."""

    vectorized = True

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg

    def __call__(self, genomes):
        return evaluate_batch(genomes, self.cfg)


def settling_time(traj: Trajectory, band: float = 0.02) -> float:
    """Time after which ``|theta|`` stays within ``band * |theta_0|``; ``inf`` if it never does."""
    ref = abs(traj.theta[0]) if traj.theta[0] != 0 else 1.0
    outside = np.flatnonzero(np.abs(traj.theta) > band * ref)
    if len(outside) == 0:
        return 0.0
    last = outside[-1]
    return math.inf if last == len(traj) - 1 else float(traj.t[last + 1])


def overshoot(traj: Trajectory) -> float:
    """Largest excursion past zero, as a fraction of ``|theta_0|``."""
    th0 = traj.theta[0]
    if th0 == 0:
        return 0.0
    return float(max(0.0, np.max(-np.sign(th0) * traj.theta)) / abs(th0))
