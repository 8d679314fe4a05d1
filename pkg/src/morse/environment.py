"""Discrete-time multi-echelon inventory MDP with a three-part vector reward.

One episode covers periods ``t = 0 .. cfg.horizon`` inclusive.  Within a
period the event order is fixed:

1. deliver pipeline shipments whose arrival period is ``t``;
2. register demand: customer demand at retail nodes plus the reorders the
   downstream nodes place this period (each order samples its lead time
   when placed and carries it until served);
3. ship ``min(on_hand + arrivals, backlog + demand)`` per node/product,
   serving outstanding demand oldest-first and enqueueing shipments bound
   for downstream nodes into the pipeline;
4. update on-hand (clipped to storage capacity, overflow lost) and backlog;
5. the root node's reorder is served immediately by the infinite
   raw-material source and enters the pipeline in full;
6. compute the reward vector (profit, -emissions, -lead time), apply any
   active disruptions, push order/demand histories and advance the clock.

All randomness flows through the ``numpy.random.Generator`` passed in; a
fixed (config, seed, action sequence) triple reproduces trajectories
bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import NetworkConfig

# objective order used everywhere: index 0 profit, 1 -emissions, 2 -lead time
OBJECTIVES = ("profit", "neg_emissions", "neg_lead_time")
N_OBJECTIVES = 3

CUSTOMER = -1  # pseudo-destination for retail customer demand


@dataclass(frozen=True)
class RewardVector:
    """Per-period reward, maximize-all convention (emissions and lead time
    enter negated)."""

    profit: float
    neg_emissions: float
    neg_lead_time: float

    def as_array(self) -> np.ndarray:
        return np.array([self.profit, self.neg_emissions, self.neg_lead_time])


@dataclass
class ActionSet:
    """Integer reorder quantities and transport-mode choices, per node and
    product."""

    orders: np.ndarray  # (n_nodes, n_products) ints in [0, max_order]
    modes: np.ndarray  # (n_nodes, n_products) ints in [0, n_modes)

    def validate(self, cfg: NetworkConfig) -> None:
        shape = (cfg.n_nodes, cfg.n_products)
        if self.orders.shape != shape or self.modes.shape != shape:
            raise ValueError(f"actions must have shape {shape}")
        if np.any(self.orders < 0) or np.any(self.orders > cfg.max_order[:, None]):
            raise ValueError("reorder quantity out of [0, max_order]")
        if np.any(self.modes < 0) or np.any(self.modes >= cfg.n_modes):
            raise ValueError("transport mode index out of range")


@dataclass
class Shipment:
    dest: int
    product: int
    qty: int
    arrival: int


@dataclass
class _Outstanding:
    """One unserved demand entry at a node: who ordered, how much is still
    owed, and the lead time sampled when the order was placed (None for
    customer demand, which leaves the system on shipping)."""

    dest: int
    product: int
    qty: int
    lead: int | None


@dataclass
class SimState:
    t: int
    on_hand: np.ndarray  # (m, p) ints
    backlog: np.ndarray  # (m, p) ints
    pipeline: list  # of Shipment
    ledger: list  # per node: list of _Outstanding, oldest first
    order_history: np.ndarray  # (n_t, m, p), index 0 = most recent period
    demand_history: np.ndarray  # (n_t, m, p)
    total_enqueued: int = 0
    total_delivered: int = 0

    def pipeline_inventory(self, cfg: NetworkConfig) -> np.ndarray:
        """V[t]: in-flight quantity per destination node and product."""
        v = np.zeros((cfg.n_nodes, cfg.n_products), dtype=int)
        for s in self.pipeline:
            v[s.dest, s.product] += s.qty
        return v

    def copy(self) -> "SimState":
        return SimState(
            t=self.t,
            on_hand=self.on_hand.copy(),
            backlog=self.backlog.copy(),
            pipeline=[Shipment(s.dest, s.product, s.qty, s.arrival) for s in self.pipeline],
            ledger=[[_Outstanding(e.dest, e.product, e.qty, e.lead) for e in node] for node in self.ledger],
            order_history=self.order_history.copy(),
            demand_history=self.demand_history.copy(),
            total_enqueued=self.total_enqueued,
            total_delivered=self.total_delivered,
        )


@dataclass
class StepRecord:
    """Everything that happened in one period, for CSV export, invariant
    checks and the control-service state summaries."""

    t: int
    orders: np.ndarray
    modes: np.ndarray
    arrivals: np.ndarray
    demand: np.ndarray
    shipped: np.ndarray
    on_hand: np.ndarray
    backlog: np.ndarray
    overflow_lost: np.ndarray
    revenue: float
    reorder_cost: float
    transport_cost: float
    holding_cost: float
    backlog_cost: float
    emissions: float
    lead_time: float
    emission_tax_paid: float
    profit_contrib: np.ndarray = field(default=None)  # per (m, p), tax excluded
    emissions_contrib: np.ndarray = field(default=None)
    lead_contrib: np.ndarray = field(default=None)


def sample_demand(cfg: NetworkConfig, t: int, rng: np.random.Generator) -> np.ndarray:
    """Customer demand for one period, shape (len(retail_nodes), n_products).

    Poisson with the configured base rate; with the seasonal flag on the
    rate is modulated sinusoidally. Entries are independent across nodes
    and products. The optional spike regime multiplies the rate for the
    whole period with one shared Bernoulli draw.
    """
    d = cfg.demand
    rate = d.base_rate
    if d.seasonal:
        rate = d.base_rate * (1.0 + d.amplitude * np.sin(2.0 * np.pi * d.frequency * t + d.phase))
    if d.spike_prob > 0.0 and rng.random() < d.spike_prob:
        rate *= d.spike_multiplier
    return rng.poisson(rate, size=(len(cfg.retail_nodes), cfg.n_products))


def sample_lead_time(cfg: NetworkConfig, mode: int, rng: np.random.Generator) -> int:
    """Periods until an order placed now arrives: a shared Poisson draw
    scaled by the chosen mode's multiplier, floored at one period."""
    if not (0 <= mode < cfg.n_modes):
        raise ValueError(f"transport mode {mode} out of range")
    x = rng.poisson(cfg.lead_time_rate)
    return max(1, int(np.rint(cfg.mode_lead_multipliers[mode] * x)))


def reset(cfg: NetworkConfig, rng: np.random.Generator) -> SimState:
    """Fresh episode state: configured initial on-hand, no backlog, empty
    pipeline, zero-padded histories."""
    m, p, n_t = cfg.n_nodes, cfg.n_products, cfg.history_window
    return SimState(
        t=0,
        on_hand=cfg.initial_on_hand.copy(),
        backlog=np.zeros((m, p), dtype=int),
        pipeline=[],
        ledger=[[] for _ in range(m)],
        order_history=np.zeros((n_t, m, p), dtype=int),
        demand_history=np.zeros((n_t, m, p), dtype=int),
    )


def observe(state: SimState, cfg: NetworkConfig) -> np.ndarray:
    """Flat observation: on-hand, pipeline and backlog levels followed by
    the last ``history_window`` order and demand matrices, all normalized
    by their capacity bounds (storage for inventory and pipeline, max
    reorder for orders, the configured demand normalizer for backlog and
    demand). Length = n_nodes * n_products * (3 + 2 * history_window).
    """
    inv_cap = np.maximum(cfg.max_inventory, 1)[:, None]
    ord_cap = np.maximum(cfg.max_order, 1)[:, None]
    v = state.pipeline_inventory(cfg)
    parts = [
        state.on_hand / inv_cap,
        v / inv_cap,
        state.backlog / cfg.demand_normalizer,
        state.order_history / ord_cap,
        state.demand_history / cfg.demand_normalizer,
    ]
    return np.concatenate([np.asarray(x, dtype=float).ravel() for x in parts])


def step(
    state: SimState,
    actions: ActionSet,
    cfg: NetworkConfig,
    rng: np.random.Generator,
    disruptions: tuple = (),
) -> tuple:
    """Advance one period in place; returns (state, RewardVector, StepRecord)."""
    actions.validate(cfg)
    t = state.t
    if t > cfg.horizon:
        raise ValueError(f"episode is over (t={t} > horizon={cfg.horizon})")

    m, p = cfg.n_nodes, cfg.n_products
    orders = actions.orders
    modes = actions.modes
    i0 = state.on_hand
    b0 = state.backlog.copy()

    # 1. deliveries
    arrivals = np.zeros((m, p), dtype=int)
    still_in_flight = []
    for s in state.pipeline:
        if s.arrival == t:
            arrivals[s.dest, s.product] += s.qty
            state.total_delivered += s.qty
        else:
            still_in_flight.append(s)
    state.pipeline = still_in_flight

    # 2. demand registration; lead times are sampled per order placed
    customer = sample_demand(cfg, t, rng)
    leads = np.zeros((m, p), dtype=int)
    lead_time_total = 0
    for node in range(m):
        for prod in range(p):
            if orders[node, prod] > 0:
                leads[node, prod] = sample_lead_time(cfg, int(modes[node, prod]), rng)
                lead_time_total += leads[node, prod]

    demand = np.zeros((m, p), dtype=int)
    for ri, node in enumerate(cfg.retail_nodes):
        for prod in range(p):
            q = int(customer[ri, prod])
            if q > 0:
                demand[node, prod] += q
                state.ledger[node].append(_Outstanding(CUSTOMER, prod, q, None))
    for node in range(1, m):  # root orders from the raw-material source instead
        up = cfg.upstream[node]
        for prod in range(p):
            q = int(orders[node, prod])
            if q > 0:
                demand[up, prod] += q
                state.ledger[up].append(_Outstanding(node, prod, q, int(leads[node, prod])))

    # 3. shipping, oldest outstanding demand first
    shipped = np.minimum(i0 + arrivals, b0 + demand)
    for node in range(m):
        remaining = shipped[node].copy()
        kept = []
        for entry in state.ledger[node]:
            take = min(entry.qty, int(remaining[entry.product]))
            if take > 0:
                remaining[entry.product] -= take
                entry.qty -= take
                if entry.dest != CUSTOMER:
                    state.pipeline.append(Shipment(entry.dest, entry.product, take, t + entry.lead))
                    state.total_enqueued += take
            if entry.qty > 0:
                kept.append(entry)
        state.ledger[node] = kept

    # 4. balance updates (arrivals beyond storage capacity are lost)
    unclipped = i0 - shipped + arrivals
    new_on_hand = np.minimum(unclipped, cfg.max_inventory[:, None])
    overflow = unclipped - new_on_hand
    state.on_hand = new_on_hand
    state.backlog = b0 - shipped + demand

    # 5. root reorder, served in full by the infinite source
    for prod in range(p):
        q = int(orders[0, prod])
        if q > 0:
            state.pipeline.append(Shipment(0, prod, q, t + int(leads[0, prod])))
            state.total_enqueued += q

    # 6. reward
    surge = 1.0
    for d in disruptions:
        if d.kind == "cost_surge" and d.active_at(t):
            surge *= d.cost_multiplier
    cost_mult = cfg.mode_cost_multipliers[modes]
    em_mult = cfg.mode_emission_multipliers[modes]
    dist = cfg.distances[:, None]

    revenue_mat = cfg.price * shipped
    reorder_mat = surge * cfg.reorder_cost * orders
    transport_mat = surge * cfg.transport_cost * cost_mult * dist * orders
    holding_mat = cfg.holding_cost * state.on_hand
    backcost_mat = cfg.backlog_cost * state.backlog
    emissions_mat = cfg.emission_rate[:, None] * em_mult * dist * orders

    emissions = float(emissions_mat.sum())
    profit_mat = revenue_mat - reorder_mat - transport_mat - holding_mat - backcost_mat
    profit = float(profit_mat.sum())
    tax = 0.0
    for d in disruptions:
        if d.kind == "emission_tax" and d.active_at(t):
            tax += d.tax_rate * max(0.0, emissions - d.emission_threshold)
    profit -= tax

    reward = RewardVector(profit, -emissions, -float(lead_time_total))
    record = StepRecord(
        t=t,
        orders=orders.copy(),
        modes=modes.copy(),
        arrivals=arrivals,
        demand=demand,
        shipped=shipped,
        on_hand=state.on_hand.copy(),
        backlog=state.backlog.copy(),
        overflow_lost=overflow,
        revenue=float(revenue_mat.sum()),
        reorder_cost=float(reorder_mat.sum()),
        transport_cost=float(transport_mat.sum()),
        holding_cost=float(holding_mat.sum()),
        backlog_cost=float(backcost_mat.sum()),
        emissions=emissions,
        lead_time=float(lead_time_total),
        emission_tax_paid=tax,
        profit_contrib=profit_mat,
        emissions_contrib=emissions_mat,
        lead_contrib=leads.astype(float),
    )

    # 7. histories and clock
    state.order_history = np.concatenate([orders[None], state.order_history[:-1]])
    state.demand_history = np.concatenate([demand[None], state.demand_history[:-1]])
    state.t = t + 1
    return state, reward, record


def record_to_rows(record: StepRecord) -> list:
    """Flatten a StepRecord into per-(node, product) CSV rows."""
    rows = []
    m, p = record.orders.shape
    for node in range(m):
        for prod in range(p):
            rows.append(
                {
                    "t": record.t,
                    "node": node,
                    "product": prod,
                    "order_qty": int(record.orders[node, prod]),
                    "transport_mode": int(record.modes[node, prod]),
                    "arrival_qty": int(record.arrivals[node, prod]),
                    "demand_qty": int(record.demand[node, prod]),
                    "shipped_qty": int(record.shipped[node, prod]),
                    "on_hand": int(record.on_hand[node, prod]),
                    "backlog": int(record.backlog[node, prod]),
                    "profit_contrib": float(record.profit_contrib[node, prod]),
                    "emissions_contrib": float(record.emissions_contrib[node, prod]),
                    "lead_time_contrib": float(record.lead_contrib[node, prod]),
                }
            )
    return rows
