"""Pareto-front neuroevolution for multi-echelon inventory control.

Evolves populations of neural order/transport policies against a
stochastic supply-chain MDP with three conflicting objectives (profit,
transport emissions, lead time), with mean or CVaR fitness, disruption
scenarios with runtime policy switching, and a live operator control
service.
"""
from .config import ConfigError, DemandParams, Disruption, NetworkConfig, TransportMode
from .environment import (
    OBJECTIVES,
    ActionSet,
    RewardVector,
    SimState,
    observe,
    reset,
    sample_demand,
    sample_lead_time,
    step,
)
from .evolve import ArchiveEntry, EvoParams, ParetoArchive, evolve
from .nsga import (
    EvaluatedIndividual,
    crowding_distance,
    dominates,
    hypervolume,
    mutate,
    non_dominated_sort,
    sbx_crossover,
    survival_select,
    tournament_select,
)
from .policy import Architecture, Genome, forward, init_genome, policy_actions, sample_action, scale_order
from .risk import (
    EpisodeReturns,
    RiskEstimate,
    collect_returns,
    cvar_estimate,
    evaluate_cvar,
    evaluate_mean,
    rollout,
    var_estimate,
)
from .scenarios import ScenarioSpec, ScenarioTrace, build_configuration, run_scenario, select_policy, summarize

__version__ = "0.1.0"
