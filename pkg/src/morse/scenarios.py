"""Disruption scenarios: run a policy archive through an emission tax or a
cost surge, once with runtime policy switching and once holding the
pre-disruption policy, under a shared seed schedule.

The three bundled network configurations (A: 3-node seasonal, B: 3-node
Poisson, C: 5-node Poisson, two products each) load from the default
parameter file shipped with the package; every coefficient in that file is
an artifact-chosen default.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .config import Disruption, NetworkConfig
from .environment import observe, reset, step
from .evolve import ParetoArchive
from .policy import policy_actions

UNIFORM_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
# switch presets per disruption kind: lean into the pressured objective
EMISSION_TAX_WEIGHTS = (0.2, 0.6, 0.2)
COST_SURGE_WEIGHTS = (0.6, 0.2, 0.2)

CONFIGURATION_IDS = ("A", "B", "C")


def build_configuration(config_id: str, horizon: int | None = None) -> NetworkConfig:
    """One of the bundled supply-chain setups: A (three nodes, seasonal
    demand), B (three nodes, Poisson demand), C (five nodes, Poisson
    demand); two products each."""
    if config_id not in CONFIGURATION_IDS:
        raise ValueError(f"unknown configuration id {config_id!r}; expected one of {CONFIGURATION_IDS}")
    raw = json.loads(
        resources.files("morse.data").joinpath("default_configurations.json").read_text()
    )
    d = raw["configurations"][config_id]
    if horizon is not None:
        d = {**d, "horizon": horizon}
    return NetworkConfig.from_dict(d)


def select_policy(archive: ParetoArchive, weights) -> int:
    """Pick the archive policy maximizing the weighted sum of min-max
    normalized fitnesses; ties go to the lowest policy id."""
    if len(archive) == 0:
        raise ValueError("cannot select from an empty archive")
    w = np.asarray(weights, dtype=float)
    fits = archive.fitness_matrix()
    if w.shape != (fits.shape[1],):
        raise ValueError(f"need {fits.shape[1]} weights")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-6:
        raise ValueError("weights must be nonnegative and sum to 1")
    lo, hi = fits.min(axis=0), fits.max(axis=0)
    span = hi - lo
    norm = np.where(span > 0, (fits - lo) / np.where(span > 0, span, 1.0), 0.0)
    scores = norm @ w
    best = int(np.argmax(scores))
    candidates = [i for i in range(len(scores)) if scores[i] == scores[best]]
    chosen = min(candidates, key=lambda i: archive.entries[i].policy_id)
    return archive.entries[chosen].policy_id


@dataclass
class ScenarioSpec:
    config_id: str
    disruption: Disruption
    horizon: int = 400
    trigger: int | str = "on_disruption"  # period, or the disruption start
    initial_weights: tuple = UNIFORM_WEIGHTS
    switch_weights: tuple | None = None  # None -> preset for the disruption kind
    replication_seeds: tuple = ()

    def __post_init__(self) -> None:
        if self.config_id not in CONFIGURATION_IDS:
            raise ValueError(f"unknown configuration id {self.config_id!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        t = self.resolved_trigger()
        if not (0 <= t < self.horizon):
            raise ValueError(f"switch trigger {t} outside horizon {self.horizon}")

    def resolved_trigger(self) -> int:
        return self.disruption.start if self.trigger == "on_disruption" else int(self.trigger)

    def resolved_switch_weights(self) -> tuple:
        if self.switch_weights is not None:
            return self.switch_weights
        return EMISSION_TAX_WEIGHTS if self.disruption.kind == "emission_tax" else COST_SURGE_WEIGHTS


@dataclass
class ScenarioTrace:
    """Per-period series for one arm; cumulative columns are prefix sums of
    the per-period values."""

    periods: np.ndarray
    policy_ids: np.ndarray
    profit: np.ndarray  # per period
    emissions: np.ndarray  # per period, positive units
    lead_time: np.ndarray  # per period (non-cumulative)
    disruption_active: np.ndarray

    @property
    def profit_cum(self) -> np.ndarray:
        return np.cumsum(self.profit)

    @property
    def emissions_cum(self) -> np.ndarray:
        return np.cumsum(self.emissions)

    def rows(self) -> list:
        pc, ec = self.profit_cum, self.emissions_cum
        return [
            {
                "period": int(self.periods[i]),
                "policy_id": int(self.policy_ids[i]),
                "profit_cum": float(pc[i]),
                "emissions_cum": float(ec[i]),
                "lead_time": float(self.lead_time[i]),
                "disruption_active": int(self.disruption_active[i]),
            }
            for i in range(len(self.periods))
        ]


def _run_arm(
    cfg: NetworkConfig,
    archive: ParetoArchive,
    spec: ScenarioSpec,
    seed: int,
    switching: bool,
) -> ScenarioTrace:
    trigger = spec.resolved_trigger()
    policy_id = select_policy(archive, spec.initial_weights)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    state = reset(cfg, rng)
    n = spec.horizon
    profit = np.zeros(n)
    emissions = np.zeros(n)
    lead = np.zeros(n)
    ids = np.zeros(n, dtype=int)
    active = np.zeros(n, dtype=bool)
    disruptions = (spec.disruption,)
    try:
        for t in range(n):
            if switching and t == trigger:
                policy_id = select_policy(archive, spec.resolved_switch_weights())
            genome = archive.get(policy_id).genome
            actions = policy_actions(genome, observe(state, cfg), cfg, rng)
            state, reward, _ = step(state, actions, cfg, rng, disruptions)
            profit[t] = reward.profit
            emissions[t] = -reward.neg_emissions
            lead[t] = -reward.neg_lead_time
            ids[t] = policy_id
            active[t] = spec.disruption.active_at(t)
    except Exception as exc:
        raise RuntimeError(f"scenario arm failed at period {t}") from exc
    return ScenarioTrace(np.arange(n), ids, profit, emissions, lead, active)


def run_scenario(spec: ScenarioSpec, archive: ParetoArchive, seed: int) -> tuple:
    """Returns (switching_trace, static_trace), both arms driven by the
    identical seed schedule and disruption; only the policy path differs
    after the trigger."""
    cfg = build_configuration(spec.config_id, horizon=spec.horizon)
    switching = _run_arm(cfg, archive, spec, seed, switching=True)
    static = _run_arm(cfg, archive, spec, seed, switching=False)
    return switching, static


def run_replications(spec: ScenarioSpec, archive: ParetoArchive) -> list:
    """run_scenario across the scenario's replication seeds."""
    return [run_scenario(spec, archive, s) for s in spec.replication_seeds]


def _phase_means(trace: ScenarioTrace, trigger: int) -> dict:
    def mean(a):
        return float(np.mean(a)) if len(a) else 0.0

    return {
        "profit_pre": mean(trace.profit[:trigger]),
        "profit_post": mean(trace.profit[trigger:]),
        "emissions_pre": mean(trace.emissions[:trigger]),
        "emissions_post": mean(trace.emissions[trigger:]),
        "lead_time_pre": mean(trace.lead_time[:trigger]),
        "lead_time_post": mean(trace.lead_time[trigger:]),
    }


def summarize(switching: ScenarioTrace, static: ScenarioTrace, trigger: int = 0) -> dict:
    """Final cumulative metrics for both arms, their deltas (switching
    minus static) and per-phase means around the trigger."""

    def finals(trace: ScenarioTrace) -> dict:
        if len(trace.periods) == 0:
            return {"profit_cum": 0.0, "emissions_cum": 0.0, "lead_time_total": 0.0}
        return {
            "profit_cum": float(trace.profit_cum[-1]),
            "emissions_cum": float(trace.emissions_cum[-1]),
            "lead_time_total": float(trace.lead_time.sum()),
        }

    f_sw, f_st = finals(switching), finals(static)
    return {
        "switching": f_sw,
        "static": f_st,
        "delta": {k: f_sw[k] - f_st[k] for k in f_sw},
        "phase_means": {
            "switching": _phase_means(switching, trigger),
            "static": _phase_means(static, trigger),
        },
    }
