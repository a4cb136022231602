"""Sensitivity sweep over population size x crossover fraction.

Each cell runs the optimizer once per replicate seed, then reports three
points of its front: A (best OF1), B (best OF2) and C (compromise: closest to
the ideal point after min-max normalization over the front).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .config import SweepSettings, sim_to_dict
from .moga import GaConfig, evolve
from .pareto import Individual, ParetoFront, hypervolume, hypervolume_excluding
from .simulation import ControllerFitness, SimConfig

log = logging.getLogger(__name__)

POINT_TYPES = ("A", "B", "C")
COMPROMISE_RULE = "C = argmin Euclidean distance to the ideal point after min-max normalization of both objectives over the front; ties -> smaller of1"
MATRIX_KEYS = tuple(f"{p}_{o}" for p in POINT_TYPES for o in ("of1", "of2"))


@dataclass(frozen=True)
class SweepGrid:
    ps_values: tuple[int, ...] = (90, 200, 500)
    cf_values: tuple[float, ...] = (0.4, 0.6, 0.8)
    seeds_per_cell: int = 5
    base_seed: int = 0
    ga: GaConfig = field(default_factory=GaConfig)
    sim: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        SweepSettings(self.ps_values, self.cf_values, self.seeds_per_cell, self.base_seed)

    @classmethod
    def from_settings(cls, s: SweepSettings, ga: GaConfig, sim: SimConfig) -> "SweepGrid":
        return cls(s.ps_values, s.cf_values, s.seeds_per_cell, s.base_seed, ga, sim)

    def cells(self) -> list[tuple[int, float, int]]:
        return [
            (ps, cf, self.base_seed + rep)
            for ps in self.ps_values
            for cf in self.cf_values
            for rep in range(self.seeds_per_cell)
        ]


@dataclass
class CasePoints:
    a: Individual
    b: Individual
    c: Individual
    ps: int | None = None
    cf: float | None = None
    seed: int | None = None

    def __getitem__(self, key: str) -> Individual:
        return {"A": self.a, "B": self.b, "C": self.c}[key]


def extract_points(front: ParetoFront | list[Individual]) -> CasePoints:
    members = list(front)
    if not members:
        raise ValueError("cannot extract points from an empty front")
    F = np.array([m.objectives for m in members], dtype=float)
    a = min(range(len(members)), key=lambda i: (F[i, 0], F[i, 1]))
    b = min(range(len(members)), key=lambda i: (F[i, 1], F[i, 0]))
    lo, hi = F.min(axis=0), F.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    dist = np.sqrt((((F - lo) / span) ** 2).sum(axis=1))
    c = min(range(len(members)), key=lambda i: (dist[i], F[i, 0]))
    return CasePoints(members[a], members[b], members[c])


@dataclass
class CellResult:
    ps: int
    cf: float
    seed: int
    front: ParetoFront | None = None
    points: CasePoints | None = None
    generations: int = 0
    stop_reason: str = ""
    hypervolume: float = math.nan
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepReport:
    grid: SweepGrid
    cells: list[CellResult]
    hv_reference: tuple[float, float]
    summaries: dict = field(default_factory=dict)

    def cell(self, ps: int, cf: float, seed: int) -> CellResult:
        for c in self.cells:
            if (c.ps, c.cf, c.seed) == (ps, cf, seed):
                return c
        raise KeyError((ps, cf, seed))


def run_cell(grid: SweepGrid, ps: int, cf: float, seed: int, fitness_factory: Callable = ControllerFitness) -> CellResult:
    cell = CellResult(ps, cf, seed)
    try:
        cfg = replace(grid.ga, ps=ps, cf=cf, rng_seed=seed)
        res = evolve(cfg, fitness_factory(grid.sim))
        cell.front = res.front
        cell.points = extract_points(res.front)
        cell.points.ps, cell.points.cf, cell.points.seed = ps, cf, seed
        cell.generations, cell.stop_reason = res.generations, res.stop_reason
    except Exception as exc:  # one bad cell must not sink the sweep
        log.error("cell ps=%s cf=%s seed=%s failed: %s", ps, cf, seed, exc)
        cell.error = f"{type(exc).__name__}: {exc}"
    return cell


def _run_cell_args(args):
    return run_cell(*args)


def sweep_reference(cells: list[CellResult]) -> tuple[float, float]:
    """Twice the largest objective values seen on any cell's front."""
    F = [c.front.objectives() for c in cells if c.ok and len(c.front)]
    if not F:
        return (1.0, 1.0)
    top = np.concatenate(F).max(axis=0)
    return tuple(float(2.0 * v) if v > 0 else 1.0 for v in top)


def run_grid(grid: SweepGrid, fitness_factory: Callable = ControllerFitness, jobs: int = 1) -> SweepReport:
    jobs_args = [(grid, ps, cf, seed, fitness_factory) for ps, cf, seed in grid.cells()]
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell_args, jobs_args))
    else:
        cells = [_run_cell_args(a) for a in jobs_args]
    ref = sweep_reference(cells)
    for c in cells:
        if c.ok:
            c.hypervolume = hypervolume(c.front.objectives(), ref)
    report = SweepReport(grid, cells, ref)
    report.summaries = summarize(report)
    return report


def _argmin_cell(M: np.ndarray, ps_values, cf_values) -> dict:
    if np.all(np.isnan(M)):
        return {"ps": None, "cf": None, "value": None, "tie": False}
    best = np.nanmin(M)
    hits = np.argwhere(M == best)
    i, j = hits[0]
    return {"ps": ps_values[i], "cf": cf_values[j], "value": float(best), "tie": bool(len(hits) > 1)}


def summarize(report: SweepReport) -> dict:
    """Seed-averaged (ps x cf) matrices for each point type and objective, plus hypervolume."""
    g = report.grid
    out = {}
    sums = {k: np.zeros((len(g.ps_values), len(g.cf_values))) for k in (*MATRIX_KEYS, "hypervolume")}
    counts = np.zeros((len(g.ps_values), len(g.cf_values)))
    for c in report.cells:
        if not c.ok:
            continue
        i, j = g.ps_values.index(c.ps), g.cf_values.index(c.cf)
        counts[i, j] += 1
        for p in POINT_TYPES:
            ind = c.points[p]
            sums[f"{p}_of1"][i, j] += ind.of1
            sums[f"{p}_of2"][i, j] += ind.of2
        sums["hypervolume"][i, j] += c.hypervolume
    with np.errstate(invalid="ignore", divide="ignore"):
        for key, S in sums.items():
            M = np.where(counts > 0, S / np.where(counts > 0, counts, 1), np.nan)
            entry = {"matrix": M.tolist()}
            if key == "hypervolume":
                entry["argmax"] = _argmin_cell(-M, g.ps_values, g.cf_values)
                if entry["argmax"]["value"] is not None:
                    entry["argmax"]["value"] = -entry["argmax"]["value"]
            else:
                entry["argmin"] = _argmin_cell(M, g.ps_values, g.cf_values)
            out[key] = entry
    return out


def _member_to_dict(m: Individual) -> dict:
    return {"genome": [float(v) for v in m.genome], "objectives": [m.of1, m.of2]}


def _member_from_dict(d: dict) -> Individual:
    return Individual(np.array(d["genome"], dtype=float), (float(d["objectives"][0]), float(d["objectives"][1])))


def front_to_dict(front: ParetoFront) -> list[dict]:
    return [_member_to_dict(m) for m in front]


def front_from_dict(members: list[dict]) -> ParetoFront:
    return ParetoFront([_member_from_dict(d) for d in members])


def points_to_dict(points: CasePoints) -> dict:
    return {p: _member_to_dict(points[p]) for p in POINT_TYPES}


def report_to_dict(report: SweepReport) -> dict:
    g = report.grid
    cells = []
    for c in report.cells:
        entry = {"ps": c.ps, "cf": c.cf, "seed": c.seed,
                 "cfg": replace(g.ga, ps=c.ps, cf=c.cf, rng_seed=c.seed).to_dict()}
        if c.ok:
            entry.update({
                "generations": c.generations,
                "stop_reason": c.stop_reason,
                "front": front_to_dict(c.front),
                "points": points_to_dict(c.points),
                "hypervolume": c.hypervolume,
            })
        else:
            entry["error"] = c.error
        cells.append(entry)
    return {
        "kind": "sweep-report",
        "grid": {"ps_values": list(g.ps_values), "cf_values": list(g.cf_values),
                 "seeds_per_cell": g.seeds_per_cell, "base_seed": g.base_seed,
                 "ga": g.ga.to_dict(), **sim_to_dict(g.sim)},
        "compromise_rule": COMPROMISE_RULE,
        "hv_reference": list(report.hv_reference),
        "cells": cells,
        "summaries": report.summaries,
    }


def report_to_json(report: SweepReport) -> str:
    return json.dumps(_nan_to_none(report_to_dict(report)), indent=2, allow_nan=False) + "\n"


def _nan_to_none(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_nan_to_none(v) for v in obj]
    return obj


def report_from_dict(d: dict) -> SweepReport:
    from .config import ga_from_dict, sim_from_dict

    if d.get("kind") != "sweep-report":
        raise ValueError("not a sweep-report document")
    gd = d["grid"]
    grid = SweepGrid(tuple(gd["ps_values"]), tuple(gd["cf_values"]), gd["seeds_per_cell"], gd["base_seed"],
                     ga_from_dict(gd["ga"]), sim_from_dict(gd))
    cells = []
    for e in d["cells"]:
        c = CellResult(e["ps"], e["cf"], e["seed"], error=e.get("error"))
        if c.ok:
            c.front = front_from_dict(e["front"])
            pts = {p: _member_from_dict(e["points"][p]) for p in POINT_TYPES}
            c.points = CasePoints(pts["A"], pts["B"], pts["C"], c.ps, c.cf, c.seed)
            c.generations, c.stop_reason = e["generations"], e["stop_reason"]
            c.hypervolume = e["hypervolume"]
        cells.append(c)
    summaries = {k: {**v, "matrix": [[math.nan if x is None else x for x in row] for row in v["matrix"]]}
                 for k, v in d["summaries"].items()}
    return SweepReport(grid, cells, tuple(d["hv_reference"]), summaries)


def matrix_csv(report: SweepReport, key: str) -> str:
    """One summary matrix as CSV: rows are PS values, columns CF values."""
    g = report.grid
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ps\\cf", *[format(cf, ".17g") for cf in g.cf_values]])
    for ps, row in zip(g.ps_values, report.summaries[key]["matrix"]):
        w.writerow([ps, *[format(v, ".17g") for v in row]])
    return buf.getvalue()


__all__ = [
    "CasePoints", "CellResult", "SweepGrid", "SweepReport", "extract_points", "hypervolume",
    "hypervolume_excluding", "matrix_csv", "report_from_dict", "report_to_json", "run_grid", "summarize",
]
