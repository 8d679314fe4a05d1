"""NSGA-II building blocks over fitness vectors in maximize-all convention.

Dominance, fast non-dominated sorting, crowding distance, binary
tournament, simulated binary crossover, Gaussian mutation, Top-N survival
and an exact hypervolume. Everything here is deterministic given the rng
stream passed in; nothing touches global random state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .policy import Genome


@dataclass
class EvaluatedIndividual:
    genome: Genome
    fitness: np.ndarray
    rank: int = 0  # 1-based front index; 0 = not yet sorted
    crowding: float = 0.0


def dominates(f_i: np.ndarray, f_l: np.ndarray) -> bool:
    """True iff f_i is at least as good everywhere and strictly better
    somewhere (maximize-all convention)."""
    f_i = np.asarray(f_i, dtype=float)
    f_l = np.asarray(f_l, dtype=float)
    if f_i.shape != f_l.shape:
        raise ValueError(f"fitness length mismatch: {f_i.shape} vs {f_l.shape}")
    return bool(np.all(f_i >= f_l) and np.any(f_i > f_l))


def non_dominated_sort(fitnesses) -> list:
    """Partition indices into fronts F_1, F_2, ... (each sorted ascending).

    Deb's fast non-dominated sort: F_1 holds everything dominated by
    nothing; each later front is non-dominated once earlier fronts are
    removed.
    """
    fits = np.asarray(fitnesses, dtype=float)
    n = len(fits)
    if n == 0:
        raise ValueError("cannot sort an empty population")
    # pairwise dominance via vectorized comparisons
    ge = np.all(fits[:, None, :] >= fits[None, :, :], axis=2)
    gt = np.any(fits[:, None, :] > fits[None, :, :], axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j

    n_dominators = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(n_dominators == 0)
    remaining_mask = np.ones(n, dtype=bool)
    while current.size:
        fronts.append([int(i) for i in current])
        remaining_mask[current] = False
        n_dominators = n_dominators - dom[current].sum(axis=0)
        current = np.flatnonzero((n_dominators == 0) & remaining_mask)
    return fronts


def crowding_distance(front_fitnesses) -> np.ndarray:
    """Crowding distances for one front (any order of members).

    Per objective, the boundary members of the sorted front get +inf and
    each interior member accrues the normalized gap between its neighbors;
    an objective with zero spread contributes nothing. Ties are broken
    stably by position in the input.
    """
    fits = np.asarray(front_fitnesses, dtype=float)
    n = len(fits)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for j in range(fits.shape[1]):
        order = np.argsort(fits[:, j], kind="stable")
        vals = fits[order, j]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def tournament_select(population: list, rng: np.random.Generator) -> EvaluatedIndividual:
    """Binary tournament: lower rank wins, ties go to larger crowding,
    residual ties to a coin flip. Contestants drawn without replacement."""
    i, l = rng.choice(len(population), size=2, replace=False)
    a, b = population[int(i)], population[int(l)]
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.random() < 0.5 else b


def sbx_crossover(
    parent_a: Genome,
    parent_b: Genome,
    rng: np.random.Generator,
    crossover_prob: float = 0.9,
    eta: float = 15.0,
) -> tuple:
    """Simulated binary crossover applied coordinate-wise with probability
    ``crossover_prob`` (otherwise the parents are copied through)."""
    if parent_a.arch != parent_b.arch:
        raise ValueError("cannot cross genomes with different architectures")
    if rng.random() >= crossover_prob:
        return parent_a.copy(), parent_b.copy()
    x1, x2 = parent_a.values, parent_b.values
    u = rng.random(x1.shape)
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (2.0 * (1.0 - u)) ** (-1.0 / (eta + 1.0)),
    )
    # mean/spread form of 0.5*((1±beta)x1 + (1∓beta)x2): identical parents
    # come through exactly
    mean = 0.5 * (x1 + x2)
    half_spread = 0.5 * beta * (x1 - x2)
    return Genome(mean + half_spread, parent_a.arch), Genome(mean - half_spread, parent_a.arch)


def mutate(
    genome: Genome,
    rng: np.random.Generator,
    mutation_prob: float | None = None,
    sigma: float = 0.1,
    weight_clip: float = 10.0,
) -> Genome:
    """Per-gene Gaussian perturbation with probability ``mutation_prob``
    (default 1/n_params), clipped to [-weight_clip, weight_clip]."""
    n = genome.values.shape[0]
    p_m = (1.0 / n) if mutation_prob is None else mutation_prob
    mask = rng.random(n) < p_m
    noise = rng.normal(0.0, sigma, size=n) if sigma > 0 else np.zeros(n)
    values = np.clip(genome.values + mask * noise, -weight_clip, weight_clip)
    return Genome(values, genome.arch)


def survival_select(individuals: list, n_keep: int) -> list:
    """Top-N of a combined parent+offspring pool.

    Fronts and crowding are recomputed on the pool; fronts fill the next
    population in rank order and the overflowing front is truncated by
    descending crowding (ties broken by pool position). Rank/crowding on
    the survivors are updated in place.
    """
    if len(individuals) < n_keep:
        raise ValueError(f"pool of {len(individuals)} cannot fill population of {n_keep}")
    fits = np.array([ind.fitness for ind in individuals], dtype=float)
    fronts = non_dominated_sort(fits)
    survivors = []
    for rank, front in enumerate(fronts, start=1):
        crowd = crowding_distance(fits[front])
        for pos, idx in enumerate(front):
            individuals[idx].rank = rank
            individuals[idx].crowding = float(crowd[pos])
        if len(survivors) + len(front) <= n_keep:
            survivors.extend(individuals[idx] for idx in front)
        else:
            room = n_keep - len(survivors)
            by_crowding = sorted(range(len(front)), key=lambda k: (-crowd[k], k))
            survivors.extend(individuals[front[k]] for k in by_crowding[:room])
        if len(survivors) == n_keep:
            break
    return survivors


def pareto_front(individuals: list) -> list:
    """Non-dominated subset of a population, in population order."""
    fits = np.array([ind.fitness for ind in individuals], dtype=float)
    return [individuals[i] for i in non_dominated_sort(fits)[0]]


def hypervolume(front, ref_point) -> float:
    """Exact hypervolume of the region dominated by ``front`` relative to
    ``ref_point`` (maximize-all). Every point must dominate the reference.

    Recursive slab sweep over the last objective; exact for any number of
    objectives and fast for the three used here.
    """
    pts = np.asarray(front, dtype=float)
    if pts.size == 0:
        return 0.0
    ref = np.asarray(ref_point, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != ref.shape[0]:
        raise ValueError("front and reference point dimensions disagree")
    if not np.all(pts >= ref) or not np.all(np.any(pts > ref, axis=1)):
        raise ValueError("every front point must dominate the reference point")
    return _hv(pts, ref)


def _hv(pts: np.ndarray, ref: np.ndarray) -> float:
    if pts.shape[1] == 1:
        return float(pts[:, 0].max() - ref[0])
    levels = np.unique(pts[:, -1])[::-1]
    vol = 0.0
    for i, z in enumerate(levels):
        z_low = levels[i + 1] if i + 1 < len(levels) else ref[-1]
        active = pts[pts[:, -1] >= z, :-1]
        vol += _hv(active, ref[:-1]) * (z - z_low)
    return vol


def front_hypervolume(front, ref_point) -> float:
    """Hypervolume of the points that dominate the reference; others are
    ignored (used for progress metrics where stragglers may fall below a
    run-fixed reference)."""
    pts = np.asarray(front, dtype=float)
    if pts.size == 0:
        return 0.0
    ref = np.asarray(ref_point, dtype=float)
    keep = np.all(pts >= ref, axis=1) & np.any(pts > ref, axis=1)
    if not np.any(keep):
        return 0.0
    return _hv(pts[keep], ref)
