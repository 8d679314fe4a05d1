"""Feed-forward policy networks evolved as flat parameter vectors.

The network maps an observation to one output block per (node, product):
a Gaussian order head (mean squashed by tanh, std via softplus with a
floor) and a categorical transport head (softmax over modes). Forward
passes are pure numpy; there is no gradient machinery anywhere.

A genome is the network's weights and biases flattened in a fixed order
(per layer: weight matrix row-major, then bias), so crossover and
mutation can treat policies as plain real vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig
from .environment import ActionSet

SIGMA_MIN = 1e-3


@dataclass(frozen=True)
class Architecture:
    """Shapes of the policy network for one network configuration."""

    input_dim: int
    n_nodes: int
    n_products: int
    n_modes: int
    hidden: tuple = (64, 64)

    @property
    def output_dim(self) -> int:
        # per (node, product): order mean, raw order std, n_modes logits
        return self.n_nodes * self.n_products * (2 + self.n_modes)

    @property
    def layer_shapes(self) -> list:
        dims = [self.input_dim, *self.hidden, self.output_dim]
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]

    @property
    def n_params(self) -> int:
        return sum(fan_in * fan_out + fan_out for fan_in, fan_out in self.layer_shapes)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "n_nodes": self.n_nodes,
            "n_products": self.n_products,
            "n_modes": self.n_modes,
            "hidden": list(self.hidden),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Architecture":
        return cls(
            input_dim=d["input_dim"],
            n_nodes=d["n_nodes"],
            n_products=d["n_products"],
            n_modes=d["n_modes"],
            hidden=tuple(d["hidden"]),
        )

    @classmethod
    def for_config(cls, cfg: NetworkConfig, hidden: tuple = (64, 64)) -> "Architecture":
        return cls(
            input_dim=cfg.observation_length(),
            n_nodes=cfg.n_nodes,
            n_products=cfg.n_products,
            n_modes=cfg.n_modes,
            hidden=tuple(hidden),
        )


@dataclass
class Genome:
    """Flat parameter vector plus the architecture it instantiates."""

    values: np.ndarray
    arch: Architecture

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.arch.n_params,):
            raise ValueError(
                f"genome length {self.values.shape} does not match architecture "
                f"({self.arch.n_params} parameters)"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("genome contains non-finite values")

    def copy(self) -> "Genome":
        return Genome(self.values.copy(), self.arch)


@dataclass
class PolicyHeads:
    """Decoded network outputs per (node, product)."""

    mean: np.ndarray  # (m, p) in (-1, 1)
    std: np.ndarray  # (m, p) >= SIGMA_MIN
    mode_probs: np.ndarray  # (m, p, n_modes), rows sum to 1


def init_genome(arch: Architecture, rng: np.random.Generator) -> Genome:
    """He-initialized genome: weights ~ N(0, 2/fan_in), biases zero."""
    chunks = []
    for fan_in, fan_out in arch.layer_shapes:
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=fan_in * fan_out)
        chunks.append(w)
        chunks.append(np.zeros(fan_out))
    return Genome(np.concatenate(chunks), arch)


def decode(genome: Genome) -> list:
    """Split the flat vector into (W, b) pairs, layer by layer."""
    layers = []
    offset = 0
    for fan_in, fan_out in genome.arch.layer_shapes:
        w = genome.values[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = genome.values[offset : offset + fan_out]
        offset += fan_out
        layers.append((w, b))
    return layers


def encode(layers: list, arch: Architecture) -> Genome:
    """Inverse of :func:`decode`."""
    chunks = []
    for w, b in layers:
        chunks.append(np.asarray(w, dtype=float).ravel())
        chunks.append(np.asarray(b, dtype=float).ravel())
    return Genome(np.concatenate(chunks), arch)


def _softplus(x: np.ndarray) -> np.ndarray:
    # stable for large |x|
    return np.logaddexp(0.0, x)


def _softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(genome: Genome, obs: np.ndarray) -> PolicyHeads:
    """Deterministic forward pass: ReLU hidden layers, then per-(node,
    product) heads (tanh mean, softplus-plus-floor std, softmax modes)."""
    arch = genome.arch
    obs = np.asarray(obs, dtype=float)
    if obs.shape != (arch.input_dim,):
        raise ValueError(f"observation length {obs.shape} != input_dim {arch.input_dim}")
    h = obs
    layers = decode(genome)
    for w, b in layers[:-1]:
        h = np.maximum(h @ w + b, 0.0)
    w, b = layers[-1]
    out = h @ w + b

    m, p, n_z = arch.n_nodes, arch.n_products, arch.n_modes
    blocks = out.reshape(m, p, 2 + n_z)
    return PolicyHeads(
        mean=np.tanh(blocks[:, :, 0]),
        std=_softplus(blocks[:, :, 1]) + SIGMA_MIN,
        mode_probs=_softmax(blocks[:, :, 2:]),
    )


def sample_action(heads: PolicyHeads, rng: np.random.Generator) -> tuple:
    """Draw unscaled actions: order values from the Gaussian heads clamped
    to [-1, 1], transport modes from the categorical heads.

    Returns (order_values, mode_indices), shapes (m, p).
    """
    raw = rng.normal(heads.mean, heads.std)
    order_values = np.clip(raw, -1.0, 1.0)
    m, p, n_z = heads.mode_probs.shape
    u = rng.random((m, p, 1))
    cdf = np.cumsum(heads.mode_probs, axis=-1)
    mode_idx = (u > cdf).sum(axis=-1)
    return order_values, np.minimum(mode_idx, n_z - 1)


def scale_order(value, o_min, o_max):
    """Affine map from [-1, 1] to [o_min, o_max]; exact at both endpoints."""
    if np.any(np.asarray(o_min) > np.asarray(o_max)):
        raise ValueError("o_min must not exceed o_max")
    return (np.asarray(value) + 1.0) / 2.0 * (np.asarray(o_max) - np.asarray(o_min)) + o_min


def policy_actions(genome: Genome, obs: np.ndarray, cfg: NetworkConfig,
                   rng: np.random.Generator) -> ActionSet:
    """Observation -> environment-ready ActionSet (orders rounded to ints)."""
    heads = forward(genome, obs)
    order_values, mode_idx = sample_action(heads, rng)
    scaled = scale_order(order_values, 0.0, cfg.max_order[:, None].astype(float))
    orders = np.rint(scaled).astype(int)
    return ActionSet(orders=orders, modes=mode_idx.astype(int))
