"""Supply-chain network parameterization and disruption definitions.

A :class:`NetworkConfig` fully describes one multi-echelon, multi-product
inventory network: topology, cost matrices, transport modes, stochastic
demand/lead-time rates and capacities.  Configs are value objects: build
one, validate it, pass it around.  JSON round-trip is provided for the CLI
and the control service (``schema_version`` = 1).

Node ids are 0-based.  Node 0 is the root of the topology and reorders
from an infinite raw-material source; every other node has exactly one
upstream supplier.  Retail nodes additionally face stochastic customer
demand.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised when a configuration violates its invariants."""


@dataclass(frozen=True)
class TransportMode:
    """One transport option (e.g. road / rail / air).

    Multipliers scale the per-node base transport cost, base emission rate
    and the shared Poisson lead-time draw. All must be positive.
    """

    name: str
    cost_multiplier: float
    emission_multiplier: float
    lead_time_multiplier: float


@dataclass(frozen=True)
class DemandParams:
    """Customer-demand process at retail nodes.

    Plain Poisson with rate ``base_rate`` or, with ``seasonal`` on, a
    non-stationary Poisson whose rate follows
    ``base_rate * (1 + amplitude * sin(2*pi*frequency*t + phase))``.

    ``spike_prob``/``spike_multiplier`` add an optional heavy-tail regime:
    each period, with probability ``spike_prob``, every retail rate is
    multiplied by ``spike_multiplier`` (one shared draw per period, so
    spikes hit the whole network at once). Defaults disable it.
    """

    base_rate: float
    seasonal: bool = False
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    spike_prob: float = 0.0
    spike_multiplier: float = 1.0


@dataclass(frozen=True)
class Disruption:
    """A scripted shock applied to the environment for a window of periods.

    ``emission_tax`` subtracts ``tax_rate * max(0, period_emissions -
    emission_threshold)`` from the period's profit.  ``cost_surge``
    multiplies the reorder and transport cost matrices by
    ``cost_multiplier``.  Active on periods ``[start, start + duration)``.
    """

    kind: str  # "emission_tax" | "cost_surge"
    start: int
    duration: int
    tax_rate: float = 0.0
    emission_threshold: float = 0.0
    cost_multiplier: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("emission_tax", "cost_surge"):
            raise ConfigError(f"unknown disruption kind {self.kind!r}")
        if self.start < 0:
            raise ConfigError("disruption start must be >= 0")
        if self.duration < 1:
            raise ConfigError("disruption duration must be >= 1")
        if self.cost_multiplier <= 0:
            raise ConfigError("cost multiplier must be > 0")

    def active_at(self, t: int) -> bool:
        return self.start <= t < self.start + self.duration

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Disruption":
        return cls(**{k: d[k] for k in d if k in cls.__dataclass_fields__})


def _matrix(x, m: int, p: int, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.shape != (m, p):
        raise ConfigError(f"{name} must have shape ({m}, {p}), got {a.shape}")
    if np.any(a < 0):
        raise ConfigError(f"{name} must be nonnegative")
    return a


@dataclass
class NetworkConfig:
    """Full parameterization of the supply chain.

    Matrices are ``n_nodes x n_products``; per-node vectors have length
    ``n_nodes``. ``upstream[i]`` is the supplier node of node ``i`` and is
    ``None`` exactly for the root node 0.
    """

    n_nodes: int
    n_products: int
    horizon: int  # episode covers periods t = 0 .. horizon inclusive
    upstream: tuple
    retail_nodes: tuple
    distances: np.ndarray  # distance to the upstream supplier, per node
    price: np.ndarray
    reorder_cost: np.ndarray
    transport_cost: np.ndarray
    holding_cost: np.ndarray
    backlog_cost: np.ndarray
    emission_rate: np.ndarray  # per node, per (item * distance)
    transport_modes: tuple
    max_order: np.ndarray  # per node, integer
    max_inventory: np.ndarray  # per node, integer
    demand: DemandParams
    lead_time_rate: float
    discount: float = 0.99
    history_window: int = 4
    initial_on_hand: np.ndarray | None = None  # default max_order // 2
    demand_normalizer: float | None = None  # default 2 * base_rate * (1 + amplitude)

    def __post_init__(self) -> None:
        m, p = self.n_nodes, self.n_products
        if m < 1 or p < 1:
            raise ConfigError("need at least one node and one product")
        if self.horizon < 0:
            raise ConfigError("horizon must be >= 0")

        self.upstream = tuple(self.upstream)
        if len(self.upstream) != m or self.upstream[0] is not None:
            raise ConfigError("upstream must have one entry per node, None for node 0")
        for i, u in enumerate(self.upstream[1:], start=1):
            if not isinstance(u, int) or not (0 <= u < m) or u == i:
                raise ConfigError(f"node {i} has invalid upstream {u!r}")
        # walking upstream from any node must reach the root: rejects cycles
        for i in range(1, m):
            seen, j = set(), i
            while j != 0:
                if j in seen:
                    raise ConfigError(f"topology has a cycle through node {i}")
                seen.add(j)
                j = self.upstream[j]

        self.retail_nodes = tuple(sorted(set(self.retail_nodes)))
        if not self.retail_nodes:
            raise ConfigError("at least one retail node required")
        for r in self.retail_nodes:
            if not (0 <= r < m):
                raise ConfigError(f"retail node {r} out of range")

        self.distances = np.asarray(self.distances, dtype=float)
        if self.distances.shape != (m,) or np.any(self.distances < 0):
            raise ConfigError("distances must be a nonnegative vector of length n_nodes")

        self.price = _matrix(self.price, m, p, "price")
        self.reorder_cost = _matrix(self.reorder_cost, m, p, "reorder_cost")
        self.transport_cost = _matrix(self.transport_cost, m, p, "transport_cost")
        self.holding_cost = _matrix(self.holding_cost, m, p, "holding_cost")
        self.backlog_cost = _matrix(self.backlog_cost, m, p, "backlog_cost")

        self.emission_rate = np.asarray(self.emission_rate, dtype=float)
        if self.emission_rate.shape != (m,) or np.any(self.emission_rate < 0):
            raise ConfigError("emission_rate must be a nonnegative vector of length n_nodes")

        self.transport_modes = tuple(
            tm if isinstance(tm, TransportMode) else TransportMode(**tm)
            for tm in self.transport_modes
        )
        if len(self.transport_modes) < 1:
            raise ConfigError("need at least one transport mode")
        for tm in self.transport_modes:
            if tm.cost_multiplier <= 0 or tm.emission_multiplier <= 0 or tm.lead_time_multiplier <= 0:
                raise ConfigError(f"transport mode {tm.name!r} multipliers must be > 0")

        self.max_order = np.asarray(self.max_order, dtype=int)
        self.max_inventory = np.asarray(self.max_inventory, dtype=int)
        if self.max_order.shape != (m,) or np.any(self.max_order < 0):
            raise ConfigError("max_order must be a nonnegative int vector of length n_nodes")
        if self.max_inventory.shape != (m,) or np.any(self.max_inventory < 0):
            raise ConfigError("max_inventory must be a nonnegative int vector of length n_nodes")

        if not isinstance(self.demand, DemandParams):
            self.demand = DemandParams(**self.demand)
        d = self.demand
        if d.base_rate < 0:
            raise ConfigError("demand base_rate must be >= 0")
        if not (0.0 <= d.amplitude <= 1.0):
            raise ConfigError("demand amplitude must be in [0, 1]")
        if not (0.0 <= d.spike_prob <= 1.0) or d.spike_multiplier < 0:
            raise ConfigError("invalid demand spike parameters")

        if self.lead_time_rate < 0:
            raise ConfigError("lead_time_rate must be >= 0")
        if not (0.0 < self.discount <= 1.0):
            raise ConfigError("discount must be in (0, 1]")
        if self.history_window < 1:
            raise ConfigError("history_window must be >= 1")

        if self.initial_on_hand is None:
            self.initial_on_hand = np.tile((self.max_order // 2)[:, None], (1, p))
        else:
            self.initial_on_hand = np.asarray(self.initial_on_hand, dtype=int)
            if self.initial_on_hand.shape != (m, p):
                raise ConfigError(f"initial_on_hand must have shape ({m}, {p})")
            if np.any(self.initial_on_hand < 0) or np.any(
                self.initial_on_hand > self.max_inventory[:, None]
            ):
                raise ConfigError("initial_on_hand out of [0, max_inventory]")

        if self.demand_normalizer is None:
            self.demand_normalizer = 2.0 * d.base_rate * (1.0 + d.amplitude)
        # floor keeps observations finite when base_rate is 0
        self.demand_normalizer = max(float(self.demand_normalizer), 1.0)

        # per-mode multiplier lookups, cached for the step hot path
        self.mode_cost_multipliers = np.array([tm.cost_multiplier for tm in self.transport_modes])
        self.mode_emission_multipliers = np.array([tm.emission_multiplier for tm in self.transport_modes])
        self.mode_lead_multipliers = np.array([tm.lead_time_multiplier for tm in self.transport_modes])

    # -- derived views ---------------------------------------------------

    @property
    def n_modes(self) -> int:
        return len(self.transport_modes)

    def downstream(self, node: int) -> list:
        return [i for i in range(self.n_nodes) if self.upstream[i] == node]

    def observation_length(self) -> int:
        return self.n_nodes * self.n_products * (3 + 2 * self.history_window)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "network_config",
            "n_nodes": self.n_nodes,
            "n_products": self.n_products,
            "horizon": self.horizon,
            "upstream": list(self.upstream),
            "retail_nodes": list(self.retail_nodes),
            "distances": self.distances.tolist(),
            "price": self.price.tolist(),
            "reorder_cost": self.reorder_cost.tolist(),
            "transport_cost": self.transport_cost.tolist(),
            "holding_cost": self.holding_cost.tolist(),
            "backlog_cost": self.backlog_cost.tolist(),
            "emission_rate": self.emission_rate.tolist(),
            "transport_modes": [asdict(tm) for tm in self.transport_modes],
            "max_order": self.max_order.tolist(),
            "max_inventory": self.max_inventory.tolist(),
            "demand": asdict(self.demand),
            "lead_time_rate": self.lead_time_rate,
            "discount": self.discount,
            "history_window": self.history_window,
            "initial_on_hand": self.initial_on_hand.tolist(),
            "demand_normalizer": self.demand_normalizer,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema_version {version}")
        keys = [
            "n_nodes", "n_products", "horizon", "upstream", "retail_nodes",
            "distances", "price", "reorder_cost", "transport_cost",
            "holding_cost", "backlog_cost", "emission_rate", "transport_modes",
            "max_order", "max_inventory", "demand", "lead_time_rate",
            "discount", "history_window", "initial_on_hand", "demand_normalizer",
        ]
        kwargs = {k: d[k] for k in keys if k in d}
        kwargs["demand"] = DemandParams(**kwargs["demand"])
        return cls(**kwargs)

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def from_json(cls, path: str | Path) -> "NetworkConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))
