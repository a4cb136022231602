"""Two-objective Pareto machinery: dominance, nondominated sorting, crowding, hypervolume.

Objectives are minimized.  Functions take an (n, 2) array-like of objective
pairs so they work for GA populations and saved fronts alike.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


def dominates(a, b) -> bool:
    """True iff ``a`` is no worse than ``b`` in both objectives and better in one."""
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def _as_objectives(objs) -> np.ndarray:
    try:
        F = np.asarray([tuple(o) if not isinstance(o, Individual) else tuple(o.objectives) for o in objs], dtype=float)
    except TypeError as exc:
        raise ValueError("every individual must carry an evaluated objective pair") from exc
    F = F.reshape(-1, 2) if F.size else np.zeros((0, 2))
    if not np.all(np.isfinite(F)):
        raise ValueError("unevaluated or non-finite objectives in population")
    return F


def domination_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when member ``i`` dominates member ``j``."""
    a = F[:, None, :]
    b = F[None, :, :]
    return np.all(a <= b, axis=2) & np.any(a < b, axis=2)


def nondominated_sort(objs) -> np.ndarray:
    """Front index (0 = nondominated) for every member."""
    F = _as_objectives(objs)
    n = len(F)
    ranks = np.full(n, -1, dtype=int)
    if n == 0:
        return ranks
    D = domination_matrix(F)
    counts = D.sum(axis=0)  # how many members dominate j
    current = np.flatnonzero(counts == 0)
    r = 0
    while len(current):
        ranks[current] = r
        counts = counts - D[current].sum(axis=0)
        counts[ranks >= 0] = -1
        current = np.flatnonzero(counts == 0)
        r += 1
    return ranks


def crowding_distance(objs) -> np.ndarray:
    """Normalized neighbour-gap sum within one front; boundary members get ``inf``."""
    F = _as_objectives(objs)
    n = len(F)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for m in range(F.shape[1]):
        order = np.argsort(F[:, m], kind="stable")
        vals = F[order, m]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def crowding_by_front(F: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    crowd = np.zeros(len(F))
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        crowd[idx] = crowding_distance(F[idx])
    return crowd


def hypervolume(objs, ref) -> float:
    """Area dominated by the members and bounded by ``ref``.

    Members that do not strictly dominate ``ref`` contribute nothing and are
    counted in a warning.
    """
    area, excluded = hypervolume_excluding(objs, ref)
    if excluded:
        log.warning("hypervolume: %d member(s) do not dominate the reference point", excluded)
    return area


def hypervolume_excluding(objs, ref) -> tuple[float, int]:
    """``(area, n_excluded)`` without logging."""
    F = np.asarray([tuple(o) if not isinstance(o, Individual) else tuple(o.objectives) for o in objs], dtype=float).reshape(-1, 2)
    ref = np.asarray(tuple(ref), dtype=float)
    inside = np.all(F < ref, axis=1)
    excluded = int((~inside).sum())
    F = F[inside]
    if len(F) == 0:
        return 0.0, excluded
    F = F[np.lexsort((F[:, 1], F[:, 0]))]
    area = 0.0
    prev_of2 = ref[1]
    for x, y in F:
        # Horizontal strip between this member's of2 and the previous staircase step.
        if y < prev_of2:
            area += (ref[0] - x) * (prev_of2 - y)
            prev_of2 = y
    return float(area), excluded


@dataclass
class Individual:
    genome: np.ndarray
    objectives: tuple[float, float]
    rank: int = 0
    crowding: float = 0.0

    @property
    def of1(self) -> float:
        return self.objectives[0]

    @property
    def of2(self) -> float:
        return self.objectives[1]


@dataclass
class ParetoFront:
    """Rank-0 members, deduplicated by genome."""

    members: list[Individual] = field(default_factory=list)

    @classmethod
    def from_arrays(cls, X: np.ndarray, F: np.ndarray) -> "ParetoFront":
        X = np.asarray(X, dtype=float)
        F = np.asarray(F, dtype=float)
        if len(X) == 0:
            return cls([])
        ranks = nondominated_sort(F)
        idx = np.flatnonzero(ranks == 0)
        _, first = np.unique(X[idx], axis=0, return_index=True)
        idx = idx[np.sort(first)]
        idx = idx[np.lexsort((F[idx, 1], F[idx, 0]))]
        crowd = crowding_distance(F[idx])
        return cls([Individual(X[i].copy(), (float(F[i, 0]), float(F[i, 1])), 0, float(c)) for i, c in zip(idx, crowd)])

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def objectives(self) -> np.ndarray:
        return np.array([m.objectives for m in self.members], dtype=float).reshape(-1, 2)

    def genomes(self) -> np.ndarray:
        return np.array([m.genome for m in self.members], dtype=float)
