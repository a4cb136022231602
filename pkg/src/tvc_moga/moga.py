"""Multi-objective genetic algorithm over bounded real genomes.

NSGA-II ranking and crowding with (mu + lambda) truncation, tournament
selection, intermediate crossover, Gaussian mutation clipped to the bounds,
and forward-ring migration between subpopulations.

Randomness comes from a single ``numpy.random.Generator`` (PCG64) seeded from
``GaConfig.rng_seed`` and consumed in a fixed order, so a run replays exactly.
Fitness must be deterministic; it is called once per generation on the whole
batch of new genomes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .pareto import ParetoFront, crowding_by_front, hypervolume_excluding, nondominated_sort
from .plant import InvalidParameterError

N_GENES = 6
LOG_COLUMNS = ("generation", "best_of1", "best_of2", "mean_of1", "mean_of2", "hypervolume", "front_size")


@dataclass(frozen=True)
class GaConfig:
    ps: int = 90
    cf: float = 0.4
    n_subpops: int = 1
    migration_fraction: float = 0.2
    migration_interval: int = 20
    migration_direction: str = "forward"
    max_generations: int = 100
    fitness_limit: float = 1e-4
    elite_count: int = 2
    tournament_size: int = 2
    crossover_ratio: float = 1.0
    mutation_sigma: float = 0.1  # stddev as a fraction of each gene's range
    lower: tuple[float, ...] = (-5.0,) * N_GENES
    upper: tuple[float, ...] = (5.0,) * N_GENES
    hv_reference: tuple[float, float] | None = None
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        checks = [
            ("ps", self.ps >= 4, "must be >= 4"),
            ("cf", 0 <= self.cf <= 1, "must lie in [0, 1]"),
            ("n_subpops", 1 <= self.n_subpops and self.ps // max(self.n_subpops, 1) >= 4, "must leave >= 4 members per subpopulation"),
            ("migration_fraction", 0 <= self.migration_fraction <= 1, "must lie in [0, 1]"),
            ("migration_interval", self.migration_interval >= 1, "must be >= 1"),
            ("migration_direction", self.migration_direction == "forward", "only 'forward' is supported"),
            ("max_generations", self.max_generations >= 1, "must be >= 1"),
            ("fitness_limit", math.isfinite(self.fitness_limit), "must be finite"),
            ("elite_count", 0 <= self.elite_count < self.ps // max(self.n_subpops, 1), "must be smaller than a subpopulation"),
            ("tournament_size", self.tournament_size >= 2, "must be >= 2"),
            ("crossover_ratio", math.isfinite(self.crossover_ratio), "must be finite"),
            ("mutation_sigma", self.mutation_sigma >= 0, "must be >= 0"),
            ("lower", len(self.lower) == len(self.upper) and all(l < u for l, u in zip(self.lower, self.upper)),
             "must be elementwise below upper, same length"),
        ]
        for name, ok, msg in checks:
            if not ok:
                raise InvalidParameterError(f"{name} {msg} (got {getattr(self, name)!r})")

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lower), np.array(self.upper)

    def subpop_sizes(self) -> list[int]:
        q, r = divmod(self.ps, self.n_subpops)
        return [q + (i < r) for i in range(self.n_subpops)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lower"], d["upper"] = list(self.lower), list(self.upper)
        if self.hv_reference is not None:
            d["hv_reference"] = list(self.hv_reference)
        return d


def clip(genome, lower, upper) -> np.ndarray:
    return np.minimum(np.maximum(genome, lower), upper)


def tournament_select(rank, crowding, k: int, rng: np.random.Generator) -> int:
    """Index of the tournament winner: lower rank, then larger crowding, then random."""
    rank = np.asarray(rank)
    if len(rank) == 0:
        raise ValueError("cannot select from an empty population")
    if k < 2:
        raise InvalidParameterError("tournament size must be >= 2")
    crowding = np.asarray(crowding, dtype=float)
    cand = rng.integers(0, len(rank), size=k)
    best_rank = rank[cand].min()
    cand = cand[rank[cand] == best_rank]
    best_crowd = crowding[cand].max()
    cand = np.unique(cand[crowding[cand] == best_crowd])
    return int(cand[0]) if len(cand) == 1 else int(cand[rng.integers(0, len(cand))])


def intermediate_crossover(p1, p2, ratio: float, rng: np.random.Generator, lower, upper) -> np.ndarray:
    """``child = p1 + ratio * r * (p2 - p1)`` with ``r ~ U[0, 1]`` per gene, clipped."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    r = rng.random(len(p1))
    return clip(p1 + ratio * r * (p2 - p1), lower, upper)


def mutate(genome, sigma: float, rng: np.random.Generator, lower, upper) -> np.ndarray:
    """Gaussian perturbation with per-gene stddev ``sigma * (upper - lower)``, clipped."""
    genome = np.asarray(genome, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    noise = rng.standard_normal(len(genome))
    return clip(genome + sigma * (upper - lower) * noise, lower, upper)


@dataclass
class Population:
    X: np.ndarray
    F: np.ndarray
    rank: np.ndarray = field(init=False)
    crowding: np.ndarray = field(init=False)

    def __post_init__(self):
        self.rerank()

    def __len__(self):
        return len(self.X)

    def rerank(self):
        self.rank = nondominated_sort(self.F)
        self.crowding = crowding_by_front(self.F, self.rank)

    def order(self) -> np.ndarray:
        """Indices best-first by (rank, -crowding); ties keep index order."""
        return np.lexsort((-self.crowding, self.rank))


def migrate(subpops: list[Population], fraction: float) -> list[Population]:
    """Copy each subpopulation's best members over the worst of the next (forward ring).

    Sources keep their members; migrants are taken from a snapshot so a
    member moves at most one hop per call.
    """
    if len(subpops) < 2 or fraction <= 0:
        return subpops
    snapshot = [(p.X.copy(), p.F.copy(), p.order()) for p in subpops]
    out = []
    for i, dest in enumerate(subpops):
        sx, sf, sorder = snapshot[i - 1]
        k = min(math.ceil(fraction * len(sorder)), len(dest))
        X, F = dest.X.copy(), dest.F.copy()
        worst = dest.order()[::-1][:k]
        X[worst] = sx[sorder[:k]]
        F[worst] = sf[sorder[:k]]
        out.append(Population(X, F))
    return out


def _environmental_selection(parents: Population, X_kids, F_kids, size: int, n_elite: int) -> Population:
    elites = parents.order()[:n_elite]
    rest = np.setdiff1d(np.arange(len(parents)), elites)
    X = np.concatenate([parents.X[rest], X_kids])
    F = np.concatenate([parents.F[rest], F_kids])
    pool = Population(X, F)
    keep = pool.order()[: size - n_elite]
    return Population(
        np.concatenate([parents.X[elites], X[keep]]),
        np.concatenate([parents.F[elites], F[keep]]),
    )


@dataclass
class EvolveResult:
    front: ParetoFront
    log: list[dict]
    generations: int
    stop_reason: str
    config: GaConfig
    population: Population


def _evaluate(fitness, X: np.ndarray, generation: int) -> np.ndarray:
    try:
        if getattr(fitness, "vectorized", False):
            F = np.asarray(fitness(X), dtype=float)
        else:
            F = np.array([tuple(fitness(x)) for x in X], dtype=float)
    except Exception as exc:
        raise RuntimeError(f"fitness evaluation failed in generation {generation}: {type(exc).__name__}: {exc}") from exc
    F = F.reshape(len(X), 2)
    if not np.all(np.isfinite(F)):
        raise RuntimeError(f"fitness returned non-finite objectives in generation {generation}")
    return F


def _default_reference(F: np.ndarray) -> tuple[float, float]:
    ref = []
    for m in range(2):
        col = F[:, m][F[:, m] < 1e5]
        top = float(col.max()) if len(col) else 1.0
        ref.append(1.1 * top if top > 0 else 1.0)
    return ref[0], ref[1]


def evolve(cfg: GaConfig, fitness: Callable, on_generation: Callable | None = None) -> EvolveResult:
    """Run the GA; returns the final nondominated front and a per-generation log.

    ``fitness`` maps one genome to an objective pair, or, when it has a truthy
    ``vectorized`` attribute, an (n, genes) array to an (n, 2) array.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    lower, upper = cfg.bounds
    sizes = cfg.subpop_sizes()
    n_genes = len(lower)

    X0 = [lower + (upper - lower) * rng.random((s, n_genes)) for s in sizes]
    F0 = _evaluate(fitness, np.concatenate(X0), 1)
    splits = np.cumsum(sizes)[:-1]
    subpops = [Population(x, f) for x, f in zip(X0, np.split(F0, splits))]
    ref = tuple(cfg.hv_reference) if cfg.hv_reference is not None else _default_reference(F0)

    history: list[dict] = []
    generation = 1
    stop_reason = "max_generations"
    while True:
        X_all = np.concatenate([p.X for p in subpops])
        F_all = np.concatenate([p.F for p in subpops])
        front = ParetoFront.from_arrays(X_all, F_all)
        history.append({
            "generation": generation,
            "best_of1": float(F_all[:, 0].min()),
            "best_of2": float(F_all[:, 1].min()),
            "mean_of1": float(F_all[:, 0].mean()),
            "mean_of2": float(F_all[:, 1].mean()),
            "hypervolume": hypervolume_excluding(front.objectives(), ref)[0],
            "front_size": len(front),
        })
        if on_generation is not None:
            on_generation(history[-1])
        if float(F_all.sum(axis=1).min()) <= cfg.fitness_limit:
            stop_reason = "fitness_limit"
            break
        if generation >= cfg.max_generations:
            break
        generation += 1

        kids = []
        for pop, size in zip(subpops, sizes):
            n_elite = min(cfg.elite_count, size - 1)
            n_off = size - n_elite
            n_cross = int(round(cfg.cf * n_off))
            children = np.empty((n_off, n_genes))
            for j in range(n_off):
                a = tournament_select(pop.rank, pop.crowding, cfg.tournament_size, rng)
                if j < n_cross:
                    b = tournament_select(pop.rank, pop.crowding, cfg.tournament_size, rng)
                    children[j] = intermediate_crossover(pop.X[a], pop.X[b], cfg.crossover_ratio, rng, lower, upper)
                else:
                    children[j] = mutate(pop.X[a], cfg.mutation_sigma, rng, lower, upper)
            kids.append((children, n_elite))
        F_kids = _evaluate(fitness, np.concatenate([c for c, _ in kids]), generation)
        F_split = np.split(F_kids, np.cumsum([len(c) for c, _ in kids])[:-1])
        subpops = [
            _environmental_selection(pop, c, f, size, n_elite)
            for pop, (c, n_elite), f, size in zip(subpops, kids, F_split, sizes)
        ]
        if cfg.n_subpops > 1 and generation % cfg.migration_interval == 0:
            subpops = migrate(subpops, cfg.migration_fraction)

    X_all = np.concatenate([p.X for p in subpops])
    F_all = np.concatenate([p.F for p in subpops])
    merged = Population(X_all, F_all)
    return EvolveResult(ParetoFront.from_arrays(X_all, F_all), history, generation, stop_reason, cfg, merged)
