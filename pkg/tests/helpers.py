"""Shared builders for test configs and genomes."""
from __future__ import annotations

import numpy as np

from morse.config import DemandParams, NetworkConfig, TransportMode

DEFAULT_MODES = (
    TransportMode("road", 1.0, 1.0, 1.0),
    TransportMode("rail", 0.6, 0.4, 1.6),
    TransportMode("air", 2.5, 3.0, 0.4),
)


def make_config(
    n_nodes: int = 1,
    n_products: int = 1,
    horizon: int = 50,
    base_rate: float = 0.0,
    seasonal: bool = False,
    amplitude: float = 0.0,
    frequency: float = 0.0,
    phase: float = 0.0,
    spike_prob: float = 0.0,
    spike_multiplier: float = 1.0,
    lead_time_rate: float = 0.0,
    price: float = 1.0,
    reorder_cost: float = 0.0,
    transport_cost: float = 0.0,
    holding_cost: float = 0.0,
    backlog_cost: float = 0.0,
    emission_rate: float = 0.0,
    max_order: int = 20,
    max_inventory: int = 100,
    initial_on_hand=None,
    distances: float = 1.0,
    modes=DEFAULT_MODES,
    retail_nodes=None,
    history_window: int = 4,
    discount: float = 1.0,
) -> NetworkConfig:
    """Serial chain 0 -> 1 -> ... with the last node retail; scalar
    arguments broadcast into the matrices."""
    m, p = n_nodes, n_products
    full = lambda v: np.full((m, p), float(v))
    return NetworkConfig(
        n_nodes=m,
        n_products=p,
        horizon=horizon,
        upstream=tuple([None] + list(range(m - 1))),
        retail_nodes=tuple(retail_nodes) if retail_nodes is not None else (m - 1,),
        distances=np.full(m, float(distances)),
        price=full(price),
        reorder_cost=full(reorder_cost),
        transport_cost=full(transport_cost),
        holding_cost=full(holding_cost),
        backlog_cost=full(backlog_cost),
        emission_rate=np.full(m, float(emission_rate)),
        transport_modes=modes,
        max_order=np.full(m, max_order, dtype=int),
        max_inventory=np.full(m, max_inventory, dtype=int),
        demand=DemandParams(
            base_rate=base_rate,
            seasonal=seasonal,
            amplitude=amplitude,
            frequency=frequency,
            phase=phase,
            spike_prob=spike_prob,
            spike_multiplier=spike_multiplier,
        ),
        lead_time_rate=lead_time_rate,
        discount=discount,
        history_window=history_window,
        initial_on_hand=initial_on_hand,
    )


def rng_from(*entropy) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(x) for x in entropy]))


def constant_policy_genome(cfg, order_fraction: float, mode: int, hidden=(8,)):
    """Pure-bias genome realizing a constant policy: every period it orders
    ``round(order_fraction * max_order)`` per node/product on the given
    transport mode. Hidden weights are zero, the std head sits at the sigma
    floor, and the chosen mode's logit dominates the softmax, so behavior is
    effectively deterministic."""
    from morse.policy import Architecture, Genome, decode, encode

    arch = Architecture.for_config(cfg, hidden=hidden)
    g = Genome(np.zeros(arch.n_params), arch)
    layers = decode(g)
    w, b = layers[-1]
    b = b.copy()
    stride = 2 + arch.n_modes
    target = np.clip(2.0 * order_fraction - 1.0, -1 + 1e-9, 1 - 1e-9)
    b[0::stride] = 40.0 if order_fraction >= 1.0 else (
        -40.0 if order_fraction <= 0.0 else np.arctanh(target))
    b[1::stride] = -40.0  # sigma floor
    for z in range(arch.n_modes):
        b[2 + z::stride] = 40.0 if z == mode else -40.0
    return encode(layers[:-1] + [(w, b)], arch)


def toy_archive(cfg, specs, seed=0):
    """ParetoArchive of constant policies.

    ``specs``: list of (order_fraction, mode, fitness_vector); fitness
    vectors must be mutually non-dominated.
    """
    from morse.evolve import ArchiveEntry, EvoParams, ParetoArchive
    from morse.policy import Architecture

    arch = Architecture.for_config(cfg, hidden=(8,))
    entries = [
        ArchiveEntry(
            policy_id=i,
            genome=constant_policy_genome(cfg, frac, mode),
            fitness=np.asarray(fit, dtype=float),
            rank=1,
            crowding=np.inf,
        )
        for i, (frac, mode, fit) in enumerate(specs)
    ]
    return ParetoArchive(entries=entries, arch=arch, seed=seed,
                         params=EvoParams(hidden=(8,)))
