"""Monte-Carlo policy evaluation: discounted episodic returns, mean
fitness, and the VaR/CVaR tail estimators used for risk-aware fitness.

All objectives live in maximize-all convention, so the "worst" outcomes
are always the smallest samples and one tail direction covers profit,
emissions and lead time alike. The tail size is ``ceil(n * (1 - alpha))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig
from .environment import N_OBJECTIVES, observe, reset, step
from .policy import Genome, policy_actions


@dataclass
class EpisodeReturns:
    """Discounted returns per episode (rows) and objective (columns)."""

    returns: np.ndarray  # (n_episodes, N_OBJECTIVES)
    seeds: list

    def __post_init__(self) -> None:
        self.returns = np.asarray(self.returns, dtype=float)
        if self.returns.ndim != 2 or self.returns.shape[1] != N_OBJECTIVES:
            raise ValueError("returns must be (n_episodes, n_objectives)")
        if not np.all(np.isfinite(self.returns)):
            raise ValueError("episode returns must be finite")


@dataclass
class RiskEstimate:
    alpha: float
    n_samples: int
    var: np.ndarray  # per objective
    cvar: np.ndarray
    mean: np.ndarray

    def to_dict(self, objectives) -> dict:
        return {
            "alpha": self.alpha,
            "n_samples": self.n_samples,
            "per_objective": {
                name: {
                    "var": float(self.var[j]),
                    "cvar": float(self.cvar[j]),
                    "mean": float(self.mean[j]),
                }
                for j, name in enumerate(objectives)
            },
        }


def rollout(
    cfg: NetworkConfig,
    genome: Genome,
    rng: np.random.Generator,
    t_tot: int | None = None,
    gamma: float | None = None,
    disruptions: tuple = (),
) -> np.ndarray:
    """One episode: reset, run periods t = 0..t_tot inclusive, return the
    gamma-discounted reward sum per objective."""
    horizon = cfg.horizon if t_tot is None else t_tot
    if horizon > cfg.horizon:
        raise ValueError(f"rollout horizon {horizon} exceeds config horizon {cfg.horizon}")
    g = cfg.discount if gamma is None else gamma
    state = reset(cfg, rng)
    total = np.zeros(N_OBJECTIVES)
    discount = 1.0
    for t in range(horizon + 1):
        try:
            actions = policy_actions(genome, observe(state, cfg), cfg, rng)
            state, reward, _ = step(state, actions, cfg, rng, disruptions)
        except Exception as exc:
            raise RuntimeError(f"rollout failed at period {t}") from exc
        total += discount * reward.as_array()
        discount *= g
    return total


def collect_returns(
    cfg: NetworkConfig,
    genome: Genome,
    n_episodes: int,
    seed_key: tuple,
    t_tot: int | None = None,
    gamma: float | None = None,
) -> EpisodeReturns:
    """Run ``n_episodes`` rollouts with per-episode streams derived from
    ``seed_key``; episode order never affects the result."""
    if n_episodes < 1:
        raise ValueError("need at least one episode")
    rows = np.empty((n_episodes, N_OBJECTIVES))
    seeds = []
    for e in range(n_episodes):
        entropy = [int(x) for x in (*seed_key, e)]
        rows[e] = rollout(cfg, genome, np.random.default_rng(np.random.SeedSequence(entropy)),
                          t_tot=t_tot, gamma=gamma)
        seeds.append(entropy)
    return EpisodeReturns(rows, seeds)


def evaluate_mean(returns: EpisodeReturns) -> np.ndarray:
    """Fitness = arithmetic mean of the episodic returns."""
    return returns.returns.mean(axis=0)


def _tail_size(n: int, alpha: float) -> int:
    if n < 1:
        raise ValueError("need at least one sample")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must be in (0, 1)")
    # tiny slack keeps ceil from overshooting on float residue (e.g. 20*0.3)
    k = math.ceil(n * (1.0 - alpha) - 1e-9)
    return max(1, min(n, k))


def var_estimate(samples, alpha: float) -> float:
    """Value at risk: the ceil(n*(1-alpha))-th smallest sample."""
    s = np.sort(np.asarray(samples, dtype=float))
    k = _tail_size(s.size, alpha)
    return float(s[k - 1])


def cvar_estimate(samples, alpha: float) -> float:
    """Conditional value at risk: mean of the ceil(n*(1-alpha)) smallest
    samples (the expected return in the worst tail)."""
    s = np.sort(np.asarray(samples, dtype=float))
    k = _tail_size(s.size, alpha)
    return float(s[:k].mean())


def evaluate_cvar(returns: EpisodeReturns, alpha: float) -> np.ndarray:
    """Fitness = per-objective CVaR of the episodic returns."""
    return np.array([cvar_estimate(returns.returns[:, j], alpha) for j in range(N_OBJECTIVES)])


def risk_estimate(returns: EpisodeReturns, alpha: float) -> RiskEstimate:
    r = returns.returns
    return RiskEstimate(
        alpha=alpha,
        n_samples=r.shape[0],
        var=np.array([var_estimate(r[:, j], alpha) for j in range(N_OBJECTIVES)]),
        cvar=np.array([cvar_estimate(r[:, j], alpha) for j in range(N_OBJECTIVES)]),
        mean=r.mean(axis=0),
    )


def evaluate_genome(
    cfg: NetworkConfig,
    genome: Genome,
    n_episodes: int,
    seed_key: tuple,
    fitness_mode: str = "mean",
    alpha: float = 0.9,
    t_tot: int | None = None,
    gamma: float | None = None,
) -> np.ndarray:
    """Fitness vector for one genome under the chosen mode."""
    returns = collect_returns(cfg, genome, n_episodes, seed_key, t_tot=t_tot, gamma=gamma)
    if fitness_mode == "mean":
        return evaluate_mean(returns)
    if fitness_mode == "cvar":
        return evaluate_cvar(returns, alpha)
    raise ValueError(f"unknown fitness mode {fitness_mode!r}")
