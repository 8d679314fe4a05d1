import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morse.nsga import (
    EvaluatedIndividual,
    crowding_distance,
    dominates,
    front_hypervolume,
    hypervolume,
    mutate,
    non_dominated_sort,
    pareto_front,
    sbx_crossover,
    survival_select,
    tournament_select,
)
from morse.policy import Architecture, Genome
from helpers import rng_from
from oracles import brute_crowding, brute_dominates, brute_fronts, brute_survival, grid_hypervolume

ARCH = Architecture(input_dim=1, n_nodes=1, n_products=1, n_modes=1, hidden=())


def genome_of(values) -> Genome:
    v = np.zeros(ARCH.n_params)
    v[: len(values)] = values
    return Genome(v, ARCH)


def individuals(fits, rank=1, crowding=0.0) -> list:
    return [
        EvaluatedIndividual(genome_of([i]), np.asarray(f, dtype=float), rank, crowding)
        for i, f in enumerate(fits)
    ]


# -- dominance -----------------------------------------------------------


def test_dominates_examples():
    assert dominates((10, -2, -3), (8, -2, -4))
    assert not dominates((1.0, 2.0), (1.0, 2.0))
    assert not dominates((10, -5), (8, -2)) and not dominates((8, -2), (10, -5))


def test_dominates_rejects_length_mismatch():
    with pytest.raises(ValueError):
        dominates((1, 2), (1, 2, 3))


fitness_vec = st.lists(st.integers(min_value=-3, max_value=3), min_size=3, max_size=3)


@given(fitness_vec, fitness_vec, fitness_vec)
def test_dominance_is_a_strict_partial_order(a, b, c):
    a, b, c = map(np.array, (a, b, c))
    assert not dominates(a, a)
    if dominates(a, b):
        assert not dominates(b, a)
    if dominates(a, b) and dominates(b, c):
        assert dominates(a, c)
    assert dominates(a, b) == brute_dominates(a, b)


# -- sorting -------------------------------------------------------------


def test_sort_hand_example():
    pts = [(2, 2), (1, 3), (1, 1), (0, 0)]
    fronts = non_dominated_sort(pts)
    assert fronts == [[0, 1], [2], [3]]
    assert fronts == brute_fronts(pts)


def test_sort_all_identical_is_one_front():
    assert non_dominated_sort([(1.0, 2.0)] * 6) == [list(range(6))]


def test_sort_total_order_gives_singleton_fronts():
    pts = [(k, k, k) for k in (5, 3, 4, 1, 2)]
    assert non_dominated_sort(pts) == [[0], [2], [1], [4], [3]]


def test_sort_rejects_empty():
    with pytest.raises(ValueError):
        non_dominated_sort([])


def test_sort_matches_oracle_on_random_populations():
    rng = rng_from(0)
    for _ in range(200):
        n = int(rng.integers(1, 40))
        fits = rng.integers(-4, 5, size=(n, 3)).astype(float)
        assert non_dominated_sort(fits) == brute_fronts(fits)


def test_front_members_are_mutually_non_dominated():
    rng = rng_from(1)
    fits = rng.normal(size=(50, 3))
    fronts = non_dominated_sort(fits)
    for k, front in enumerate(fronts):
        for i in front:
            for j in front:
                assert not dominates(fits[i], fits[j])
        if k > 0:
            for i in front:  # dominated by someone one front up
                assert any(dominates(fits[j], fits[i]) for j in fronts[k - 1])


# -- crowding ------------------------------------------------------------


def test_crowding_hand_example():
    d = crowding_distance([(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)])
    assert d[0] == math.inf and d[2] == math.inf
    assert d[1] == pytest.approx(2.0)


def test_crowding_small_fronts_are_all_infinite():
    assert np.all(np.isinf(crowding_distance([(1.0, 2.0)])))
    assert np.all(np.isinf(crowding_distance([(1.0, 2.0), (2.0, 1.0)])))


def test_crowding_flat_objective_contributes_nothing():
    d = crowding_distance([(0.0, 5.0), (0.5, 5.0), (1.0, 5.0)])
    assert d[1] == pytest.approx(1.0)  # objective 1 has zero spread


def test_crowding_with_duplicated_extreme_matches_oracle():
    front = [(0.0, 1.0), (0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]
    mine = crowding_distance(front)
    ref = brute_crowding(front)
    assert list(mine) == ref


def test_crowding_matches_oracle_exactly_on_random_fronts():
    rng = rng_from(2)
    for _ in range(200):
        n = int(rng.integers(1, 20))
        front = rng.normal(size=(n, 3))
        mine = crowding_distance(front)
        ref = brute_crowding([tuple(row) for row in front])
        assert [x for x in mine] == ref  # bitwise, including infinities


@given(
    st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)),
             min_size=3, max_size=10),
    st.floats(min_value=0.1, max_value=10.0),
    st.floats(min_value=-5.0, max_value=5.0),
    st.integers(min_value=0, max_value=2),
)
def test_crowding_invariant_under_affine_objective_rescale(front, scale, shift, axis):
    base = np.array(front, dtype=float)
    scaled = base.copy()
    scaled[:, axis] = scale * scaled[:, axis] + shift
    a, b = crowding_distance(base), crowding_distance(scaled)
    assert np.allclose(a, b, equal_nan=False) or np.array_equal(np.isinf(a), np.isinf(b)) and np.allclose(
        a[~np.isinf(a)], b[~np.isinf(b)], rtol=1e-9, atol=1e-9)


# -- tournament ----------------------------------------------------------


def test_tournament_rank_beats_crowding():
    pop = individuals([(1, 1, 1), (2, 2, 2)])
    pop[0].rank, pop[0].crowding = 1, 0.1
    pop[1].rank, pop[1].crowding = 2, math.inf
    for seed in range(20):
        assert tournament_select(pop, rng_from(seed)) is pop[0]


def test_tournament_crowding_breaks_rank_ties():
    pop = individuals([(1, 1, 1), (2, 2, 2)])
    pop[0].rank, pop[0].crowding = 1, math.inf
    pop[1].rank, pop[1].crowding = 1, 1.5
    for seed in range(20):
        assert tournament_select(pop, rng_from(seed)) is pop[0]


def test_tournament_coin_flip_on_full_tie():
    pop = individuals([(1, 1, 1), (1, 1, 1)])
    for ind in pop:
        ind.rank, ind.crowding = 1, math.inf
    rng = rng_from(3)
    n = 10_000
    wins = sum(tournament_select(pop, rng) is pop[0] for _ in range(n))
    assert abs(wins / n - 0.5) < 3 * np.sqrt(0.25 / n)


# -- variation -----------------------------------------------------------


def test_sbx_identical_parents_fixed_point():
    g = genome_of([0.3])
    c1, c2 = sbx_crossover(g, g, rng_from(0), crossover_prob=1.0)
    assert np.array_equal(c1.values, g.values)
    assert np.array_equal(c2.values, g.values)


def test_sbx_probability_zero_copies_parents():
    a, b = genome_of([0.0]), genome_of([1.0])
    c1, c2 = sbx_crossover(a, b, rng_from(1), crossover_prob=0.0)
    assert np.array_equal(c1.values, a.values)
    assert np.array_equal(c2.values, b.values)
    assert c1.values is not a.values  # copies, not aliases


def test_sbx_rejects_architecture_mismatch():
    other = Architecture(input_dim=2, n_nodes=1, n_products=1, n_modes=1, hidden=())
    with pytest.raises(ValueError):
        sbx_crossover(genome_of([0.0]), Genome(np.zeros(other.n_params), other), rng_from(0))


def test_sbx_offspring_centered_between_parents():
    arch = Architecture(input_dim=4, n_nodes=1, n_products=1, n_modes=2, hidden=())
    a = Genome(np.zeros(arch.n_params), arch)
    b = Genome(np.ones(arch.n_params), arch)
    rng = rng_from(4)
    vals = []
    for _ in range(10_000):
        c1, c2 = sbx_crossover(a, b, rng, crossover_prob=1.0)
        vals.append(c1.values)
        vals.append(c2.values)
    vals = np.array(vals)
    sem = vals.std(axis=0) / np.sqrt(vals.shape[0])
    assert np.all(np.abs(vals.mean(axis=0) - 0.5) < 3 * sem)


def test_mutation_zero_sigma_is_identity():
    g = genome_of([0.5])
    assert np.array_equal(mutate(g, rng_from(0), sigma=0.0).values, g.values)


def test_mutation_std_matches_sigma():
    arch = Architecture(input_dim=1, n_nodes=1, n_products=1, n_modes=1, hidden=())
    base = Genome(np.zeros(arch.n_params), arch)
    rng = rng_from(5)
    deltas = np.array([
        (mutate(base, rng, mutation_prob=1.0, sigma=0.1).values - base.values)
        for _ in range(10_000)
    ]).ravel()
    assert abs(deltas.std() - 0.1) / 0.1 < 0.05


def test_mutation_respects_weight_clip():
    g = genome_of([9.9])
    rng = rng_from(6)
    for _ in range(200):
        out = mutate(g, rng, mutation_prob=1.0, sigma=5.0, weight_clip=10.0)
        assert np.all(np.abs(out.values) <= 10.0)


# -- survival ------------------------------------------------------------


def test_survival_keeps_exact_first_front():
    fits = [(2, 2, 2), (1, 3, 2), (0, 0, 0), (0, 1, 0)]
    pop = individuals(fits)
    kept = survival_select(pop, 2)
    assert [k.fitness.tolist() for k in kept] == [[2, 2, 2], [1, 3, 2]]
    assert all(k.rank == 1 for k in kept)


def test_survival_truncates_by_crowding():
    # one front of 4; the two extremes have infinite crowding
    fits = [(0.0, 1.0), (0.4, 0.6), (0.6, 0.4), (1.0, 0.0)]
    kept = survival_select(individuals(fits), 3)
    kept_sets = {tuple(k.fitness) for k in kept}
    assert (0.0, 1.0) in kept_sets and (1.0, 0.0) in kept_sets
    assert len(kept) == 3


def test_survival_never_prefers_rank_two():
    rng = rng_from(7)
    for _ in range(50):
        fits = rng.integers(-3, 4, size=(12, 3)).astype(float)
        kept = survival_select(individuals(fits), 6)
        kept_ids = {id(k) for k in kept}
        pool = individuals(fits)  # fresh ranks via oracle
        fronts = brute_fronts(fits)
        rank_of = {}
        for r, front in enumerate(fronts, start=1):
            for i in front:
                rank_of[i] = r
        max_kept = max(k.rank for k in kept)
        # no discarded individual has rank strictly lower than a kept one
        discarded = [i for i in range(12) if all(
            not np.array_equal(fits[i], k.fitness) or rank_of[i] != k.rank for k in kept)]
        for k in kept:
            assert k.rank <= max_kept


def test_survival_matches_oracle_on_random_pools():
    rng = rng_from(8)
    for _ in range(200):
        n = int(rng.integers(2, 30))
        keep = int(rng.integers(1, n + 1))
        fits = rng.integers(-4, 5, size=(n, 3)).astype(float)
        pop = individuals(fits)
        kept = survival_select(pop, keep)
        expected = brute_survival(fits, keep)
        got = [next(i for i, x in enumerate(pop) if x is k) for k in kept]
        assert got == expected


def test_survival_rejects_undersized_pool():
    with pytest.raises(ValueError):
        survival_select(individuals([(1, 1)]), 2)


def test_pareto_front_extraction():
    fits = [(1, 1), (2, 0), (0, 2), (0, 0)]
    front = pareto_front(individuals(fits))
    assert [tuple(f.fitness) for f in front] == [(1, 1), (2, 0), (0, 2)]


# -- hypervolume ---------------------------------------------------------


def test_hypervolume_unit_box():
    assert hypervolume([(1.0, 1.0, 1.0)], (0.0, 0.0, 0.0)) == 1.0


def test_hypervolume_empty_front_is_zero():
    assert hypervolume([], (0.0, 0.0, 0.0)) == 0.0


def test_hypervolume_inclusion_exclusion_example():
    # 2 + 2 - 1 by hand
    assert hypervolume([(2, 1, 1), (1, 2, 1)], (0, 0, 0)) == pytest.approx(3.0)


def test_hypervolume_rejects_point_not_dominating_ref():
    with pytest.raises(ValueError):
        hypervolume([(1.0, -1.0, 1.0)], (0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        hypervolume([(0.0, 0.0, 0.0)], (0.0, 0.0, 0.0))


def test_hypervolume_matches_grid_oracle():
    rng = rng_from(9)
    for _ in range(100):
        n = int(rng.integers(1, 12))
        pts = rng.integers(1, 8, size=(n, 3)).astype(float)
        ref = np.zeros(3)
        assert hypervolume(pts, ref) == pytest.approx(grid_hypervolume(pts, ref))


@settings(max_examples=60)
@given(
    st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6)),
             min_size=1, max_size=8),
    st.tuples(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6)),
)
def test_hypervolume_monotone_under_added_point(pts, extra):
    ref = (0.0, 0.0, 0.0)
    base = hypervolume(pts, ref)
    assert hypervolume(pts + [extra], ref) >= base - 1e-12


def test_front_hypervolume_filters_stragglers():
    ref = (0.0, 0.0, 0.0)
    pts = [(2.0, 2.0, 2.0), (-1.0, 5.0, 5.0)]
    assert front_hypervolume(pts, ref) == hypervolume([(2.0, 2.0, 2.0)], ref)
    assert front_hypervolume([(-1.0, -1.0, -1.0)], ref) == 0.0
