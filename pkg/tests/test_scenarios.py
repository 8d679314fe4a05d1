import numpy as np
import pytest
from hypothesis import given, strategies as st

from morse.config import Disruption
from morse.scenarios import (
    EMISSION_TAX_WEIGHTS,
    ScenarioSpec,
    ScenarioTrace,
    build_configuration,
    run_scenario,
    select_policy,
    summarize,
)
from helpers import toy_archive


def emission_tax(start=10, duration=20):
    return Disruption("emission_tax", start, duration, tax_rate=2.0, emission_threshold=5.0)


def cost_surge(start=10, duration=20):
    return Disruption("cost_surge", start, duration, cost_multiplier=1.1)


# two constant policies: id 0 orders aggressively by road, id 1 orders
# lightly by rail. normalized fitness puts policy 0 ahead on profit and
# lead time, policy 1 ahead on emissions.
TWO_POLICY_SPECS = [
    (0.35, 0, (100.0, -50.0, -60.0)),  # profit-leaning
    (0.10, 1, (40.0, -10.0, -90.0)),  # emission-leaning
]


# -- configurations --------------------------------------------------------


def test_configuration_a_is_three_node_seasonal():
    cfg = build_configuration("A")
    assert cfg.n_nodes == 3 and cfg.n_products == 2
    assert cfg.demand.seasonal


def test_configuration_b_is_three_node_poisson():
    cfg = build_configuration("B")
    assert cfg.n_nodes == 3 and cfg.n_products == 2
    assert not cfg.demand.seasonal


def test_configuration_c_is_five_node_poisson():
    cfg = build_configuration("C")
    assert cfg.n_nodes == 5 and cfg.n_products == 2
    assert not cfg.demand.seasonal


def test_configurations_form_a_rooted_chain():
    for cid in "ABC":
        cfg = build_configuration(cid)
        assert cfg.upstream[0] is None
        assert all(isinstance(u, int) for u in cfg.upstream[1:])
        assert cfg.retail_nodes == (cfg.n_nodes - 1,)


def test_unknown_configuration_id():
    with pytest.raises(ValueError):
        build_configuration("D")


# -- select_policy ----------------------------------------------------------


def test_profit_only_weights_pick_max_profit():
    cfg = build_configuration("A", horizon=20)
    archive = toy_archive(cfg, TWO_POLICY_SPECS)
    assert select_policy(archive, (1.0, 0.0, 0.0)) == 0


def test_singleton_archive_always_selected():
    cfg = build_configuration("A", horizon=20)
    archive = toy_archive(cfg, [TWO_POLICY_SPECS[0]])
    for w in [(1, 0, 0), (0, 1, 0), (1 / 3, 1 / 3, 1 / 3)]:
        assert select_policy(archive, w) == 0


def test_hand_evaluated_scalarization():
    cfg = build_configuration("A", horizon=20)
    archive = toy_archive(cfg, [
        (0.5, 0, (10.0, -5.0, -5.0)),
        (0.2, 1, (5.0, -1.0, -1.0)),
    ])
    assert select_policy(archive, (0.0, 0.5, 0.5)) == 1


def test_selection_tie_breaks_to_lowest_id():
    cfg = build_configuration("A", horizon=20)
    # identical fitnesses: every normalized column is flat
    archive = toy_archive(cfg, [
        (0.5, 0, (1.0, -1.0, -1.0)),
        (0.2, 1, (1.0, -1.0, -1.0)),
    ])
    assert select_policy(archive, (1 / 3, 1 / 3, 1 / 3)) == 0


@given(st.floats(min_value=0.1, max_value=50.0), st.floats(min_value=-20.0, max_value=20.0),
       st.integers(min_value=0, max_value=2))
def test_selection_invariant_under_affine_rescale(scale, shift, axis):
    cfg = build_configuration("A", horizon=20)
    base = [
        (0.35, 0, [100.0, -50.0, -60.0]),
        (0.10, 1, [40.0, -10.0, -90.0]),
        (0.20, 2, [60.0, -80.0, -20.0]),
    ]
    rescaled = [(f, m, list(fit)) for f, m, fit in base]
    for _, _, fit in rescaled:
        fit[axis] = scale * fit[axis] + shift
    a = toy_archive(cfg, base)
    b = toy_archive(cfg, rescaled)
    for w in [(0.2, 0.6, 0.2), (0.6, 0.2, 0.2), (1 / 3, 1 / 3, 1 / 3)]:
        assert select_policy(a, w) == select_policy(b, w)


def test_select_policy_validates_inputs():
    cfg = build_configuration("A", horizon=20)
    archive = toy_archive(cfg, TWO_POLICY_SPECS)
    with pytest.raises(ValueError):
        select_policy(archive, (0.5, 0.5))
    with pytest.raises(ValueError):
        select_policy(archive, (0.9, 0.3, -0.2))
    with pytest.raises(ValueError):
        select_policy(archive, (0.5, 0.2, 0.2))


# -- run_scenario -----------------------------------------------------------


def test_same_policy_in_both_arms_gives_identical_traces():
    cfg = build_configuration("B", horizon=40)
    archive = toy_archive(cfg, TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", emission_tax(start=10, duration=5), horizon=40,
                        initial_weights=(1.0, 0.0, 0.0),
                        switch_weights=(1.0, 0.0, 0.0))  # switch picks the same policy
    switching, static = run_scenario(spec, archive, seed=3)
    assert np.array_equal(switching.policy_ids, static.policy_ids)
    assert np.array_equal(switching.profit, static.profit)
    assert np.array_equal(switching.emissions, static.emissions)
    assert np.array_equal(switching.lead_time, static.lead_time)


def test_switch_changes_policy_series_exactly_at_trigger():
    cfg = build_configuration("B", horizon=60)
    archive = toy_archive(cfg, TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", emission_tax(start=30, duration=10), horizon=60,
                        initial_weights=(1.0, 0.0, 0.0))
    switching, static = run_scenario(spec, archive, seed=4)
    assert np.all(switching.policy_ids[:30] == 0)
    assert np.all(switching.policy_ids[30:] == 1)  # emission-leaning preset
    assert np.all(static.policy_ids == 0)


def test_arms_share_draws_before_the_trigger():
    archive = toy_archive(build_configuration("B", horizon=50), TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", cost_surge(start=25, duration=10), horizon=50,
                        initial_weights=(0.0, 1.0, 0.0))
    switching, static = run_scenario(spec, archive, seed=5)
    assert np.array_equal(switching.profit[:25], static.profit[:25])
    assert np.array_equal(switching.emissions[:25], static.emissions[:25])


def test_disruption_flag_matches_window():
    archive = toy_archive(build_configuration("B", horizon=50), TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", emission_tax(start=20, duration=15), horizon=50)
    switching, _ = run_scenario(spec, archive, seed=6)
    assert not switching.disruption_active[19]
    assert np.all(switching.disruption_active[20:35])
    assert not switching.disruption_active[35]


def test_switching_arm_only_uses_archive_policies():
    archive = toy_archive(build_configuration("B", horizon=30), TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", cost_surge(start=10, duration=10), horizon=30)
    switching, static = run_scenario(spec, archive, seed=7)
    valid = {e.policy_id for e in archive.entries}
    assert set(switching.policy_ids) <= valid and set(static.policy_ids) <= valid


def test_emission_switch_cuts_post_trigger_emissions():
    cfg = build_configuration("B", horizon=60)
    archive = toy_archive(cfg, TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", emission_tax(start=30, duration=30), horizon=60,
                        initial_weights=(1.0, 0.0, 0.0))
    for seed in range(5):
        switching, static = run_scenario(spec, archive, seed=seed)
        assert switching.emissions[30:].sum() < static.emissions[30:].sum()


def test_trigger_must_sit_inside_horizon():
    with pytest.raises(ValueError):
        ScenarioSpec("B", emission_tax(start=100, duration=5), horizon=50)


def test_run_replications_covers_every_seed():
    from morse.scenarios import run_replications

    archive = toy_archive(build_configuration("B", horizon=20), TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", cost_surge(start=5, duration=5), horizon=20,
                        replication_seeds=(3, 4, 5))
    results = run_replications(spec, archive)
    assert len(results) == 3
    # each replication is a (switching, static) pair over the full horizon
    for switching, static in results:
        assert len(switching.periods) == 20 and len(static.periods) == 20


def test_default_switch_weights_follow_disruption_kind():
    spec = ScenarioSpec("B", emission_tax(start=5, duration=5), horizon=20)
    assert spec.resolved_switch_weights() == EMISSION_TAX_WEIGHTS


# -- summarize --------------------------------------------------------------


def empty_trace() -> ScenarioTrace:
    z = np.zeros(0)
    return ScenarioTrace(z, z.astype(int), z, z, z, z.astype(bool))


def test_summarize_empty_traces_zeroed():
    report = summarize(empty_trace(), empty_trace())
    assert report["switching"]["profit_cum"] == 0.0
    assert report["delta"]["emissions_cum"] == 0.0


def test_summarize_final_equals_sum_of_periods():
    archive = toy_archive(build_configuration("B", horizon=30), TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", cost_surge(start=10, duration=10), horizon=30)
    switching, static = run_scenario(spec, archive, seed=8)
    report = summarize(switching, static, spec.resolved_trigger())
    assert report["switching"]["profit_cum"] == pytest.approx(switching.profit.sum())
    assert report["static"]["emissions_cum"] == pytest.approx(static.emissions.sum())


def test_summarize_delta_antisymmetric():
    archive = toy_archive(build_configuration("B", horizon=30), TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", cost_surge(start=10, duration=10), horizon=30)
    switching, static = run_scenario(spec, archive, seed=9)
    fwd = summarize(switching, static)["delta"]
    rev = summarize(static, switching)["delta"]
    for k in fwd:
        assert fwd[k] == pytest.approx(-rev[k])


def test_trace_cumulative_is_prefix_sum():
    archive = toy_archive(build_configuration("B", horizon=25), TWO_POLICY_SPECS)
    spec = ScenarioSpec("B", cost_surge(start=5, duration=5), horizon=25)
    trace, _ = run_scenario(spec, archive, seed=10)
    assert np.allclose(trace.profit_cum, np.cumsum(trace.profit))
    rows = trace.rows()
    assert rows[-1]["profit_cum"] == pytest.approx(trace.profit.sum())
