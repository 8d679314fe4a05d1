"""The evolutionary loop: evaluate a population of policy genomes, sort,
select, vary, survive, and extract the final Pareto front.

Per-individual evaluation streams are derived from (seed, generation,
index, episode), so running evaluations in parallel can never change the
result. Whole runs are bit-reproducible from (config, params, seed).
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from .config import NetworkConfig
from .environment import OBJECTIVES
from .nsga import (
    EvaluatedIndividual,
    crowding_distance,
    front_hypervolume,
    mutate,
    non_dominated_sort,
    pareto_front,
    sbx_crossover,
    survival_select,
    tournament_select,
)
from .policy import Architecture, Genome, init_genome
from .risk import evaluate_genome

# seed-stream domain tags: initialization, variation, evaluation
_TAG_INIT, _TAG_VARY, _TAG_EVAL = 0, 1, 2


@dataclass
class EvoParams:
    population_size: int = 24
    generations: int = 40
    episodes: int = 5
    fitness_mode: str = "mean"  # "mean" | "cvar"
    risk_alpha: float = 0.9
    crossover_prob: float = 0.9
    crossover_eta: float = 15.0
    mutation_sigma: float = 0.1
    mutation_prob: float | None = None  # default 1/n_params
    weight_clip: float = 10.0
    hidden: tuple = (64, 64)
    rollout_horizon: int | None = None  # default: config horizon
    convergence_epsilon: float | None = None  # None disables early stop
    convergence_window: int = 5
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.fitness_mode not in ("mean", "cvar"):
            raise ValueError(f"unknown fitness mode {self.fitness_mode!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass
class Population:
    members: list  # EvaluatedIndividual
    generation: int = 0


@dataclass
class ArchiveEntry:
    policy_id: int
    genome: Genome
    fitness: np.ndarray
    rank: int
    crowding: float
    risk: dict | None = None  # filled in by post-hoc evaluation


@dataclass
class ParetoArchive:
    entries: list
    arch: Architecture
    seed: int
    params: EvoParams
    config_digest: str = ""
    ref_point: np.ndarray | None = None

    def __post_init__(self) -> None:
        fits = np.array([e.fitness for e in self.entries])
        for i, e in enumerate(self.entries):
            others = np.delete(fits, i, axis=0)
            if others.size and any(
                np.all(o >= e.fitness) and np.any(o > e.fitness) for o in others
            ):
                raise ValueError("archive contains a dominated entry")

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, policy_id: int) -> ArchiveEntry:
        for e in self.entries:
            if e.policy_id == policy_id:
                return e
        raise KeyError(f"no policy {policy_id} in archive")

    def fitness_matrix(self) -> np.ndarray:
        return np.array([e.fitness for e in self.entries], dtype=float)


def _eval_task(args) -> np.ndarray:
    cfg, values, arch, n_episodes, seed_key, mode, alpha, t_tot, gen_tag, idx = args
    try:
        genome = Genome(np.asarray(values), arch)
        return evaluate_genome(cfg, genome, n_episodes, seed_key,
                               fitness_mode=mode, alpha=alpha, t_tot=t_tot)
    except Exception as exc:
        raise RuntimeError(
            f"policy evaluation failed at generation {gen_tag}, individual {idx}"
        ) from exc


def _evaluate_all(cfg, genomes, params: EvoParams, seed: int, gen_tag: int,
                  executor) -> list:
    tasks = [
        (cfg, g.values, g.arch, params.episodes,
         (seed, _TAG_EVAL, gen_tag, idx), params.fitness_mode,
         params.risk_alpha, params.rollout_horizon, gen_tag, idx)
        for idx, g in enumerate(genomes)
    ]
    if executor is None:
        return [_eval_task(t) for t in tasks]
    return list(executor.map(_eval_task, tasks, chunksize=1))


def _rng(*entropy) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(x) for x in entropy]))


def evolve(cfg: NetworkConfig, params: EvoParams, seed: int):
    """Run the full loop; returns (ParetoArchive, per-generation metrics).

    Metrics rows carry the generation number, front sizes, the first
    front's hypervolume against a run-fixed reference point, and the best
    value per objective.
    """
    arch = Architecture.for_config(cfg, hidden=params.hidden)
    n = params.population_size

    executor = None
    if params.jobs > 1:
        executor = ProcessPoolExecutor(max_workers=params.jobs)
    try:
        genomes = [init_genome(arch, _rng(seed, _TAG_INIT, i)) for i in range(n)]
        fitnesses = _evaluate_all(cfg, genomes, params, seed, 0, executor)
        population = Population(
            members=[EvaluatedIndividual(g, f) for g, f in zip(genomes, fitnesses)],
            generation=0,
        )
        _assign_ranks(population.members)

        # fixed reference point so hypervolume is comparable across generations
        all_fits = np.array([ind.fitness for ind in population.members])
        ref_point = all_fits.min(axis=0) - 1.0

        metrics = [_generation_metrics(population, ref_point)]
        hv_history = [metrics[0]["hypervolume"]]

        for gen in range(1, params.generations + 1):
            vary_rng = _rng(seed, _TAG_VARY, gen)
            offspring = []
            while len(offspring) < n:
                pa = tournament_select(population.members, vary_rng)
                pb = tournament_select(population.members, vary_rng)
                c1, c2 = sbx_crossover(pa.genome, pb.genome, vary_rng,
                                       params.crossover_prob, params.crossover_eta)
                for child in (c1, c2):
                    offspring.append(mutate(child, vary_rng, params.mutation_prob,
                                            params.mutation_sigma, params.weight_clip))
            offspring = offspring[:n]

            child_fits = _evaluate_all(cfg, offspring, params, seed, gen, executor)
            pool = population.members + [
                EvaluatedIndividual(g, f) for g, f in zip(offspring, child_fits)
            ]
            population = Population(members=survival_select(pool, n), generation=gen)

            row = _generation_metrics(population, ref_point)
            metrics.append(row)
            hv_history.append(row["hypervolume"])
            if _converged(hv_history, params):
                break
    finally:
        if executor is not None:
            executor.shutdown()

    front = pareto_front(population.members)
    entries = [
        ArchiveEntry(policy_id=i, genome=ind.genome, fitness=ind.fitness,
                     rank=ind.rank, crowding=ind.crowding)
        for i, ind in enumerate(front)
    ]
    archive = ParetoArchive(entries=entries, arch=arch, seed=seed, params=params,
                            ref_point=ref_point)
    return archive, metrics


def _assign_ranks(population: list) -> None:
    fits = np.array([ind.fitness for ind in population])
    for rank, front in enumerate(non_dominated_sort(fits), start=1):
        crowd = crowding_distance(fits[front])
        for pos, idx in enumerate(front):
            population[idx].rank = rank
            population[idx].crowding = float(crowd[pos])


def _generation_metrics(population: Population, ref_point: np.ndarray) -> dict:
    fits = np.array([ind.fitness for ind in population.members])
    fronts = non_dominated_sort(fits)
    best = fits.max(axis=0)
    return {
        "generation": population.generation,
        "front_sizes": [len(f) for f in fronts],
        "hypervolume": front_hypervolume(fits[fronts[0]], ref_point),
        **{f"best_{name}": float(best[j]) for j, name in enumerate(OBJECTIVES)},
    }


def _converged(hv_history: list, params: EvoParams) -> bool:
    eps, window = params.convergence_epsilon, params.convergence_window
    if eps is None or len(hv_history) <= window:
        return False
    recent = hv_history[-(window + 1):]
    return all(recent[i + 1] - recent[i] < eps for i in range(window))
