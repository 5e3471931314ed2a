"""Feed-forward ReLU reward networks with exact pairwise-likelihood gradients.

The estimator is a fully connected ReLU network mapping a state to one
score per action.  The raw head is mean-centered over actions, which
enforces the identification constraint sum_a r(s, a) = 0 exactly and
differentiably (preference likelihoods only see score differences, so the
constraint costs nothing).

Gradients of the comparison negative log-likelihood are hand-derived
reverse-mode for this fixed topology (affine-ReLU chain, centering,
pairwise difference, log-density composition); there is no general
autodiff here.

A note on theory vs practice: the statistical guarantees behind the sizing
helpers assume network parameters confined to [-1, 1]; training does not
project onto that box, and the helpers are reporting aids only.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .comparison import ComparisonModel, dlog_density_du, log_density
from .errors import ConfigurationError, DomainError

__all__ = [
    "MLPArchitecture",
    "MLPParameters",
    "MLPGradients",
    "init_params",
    "forward",
    "forward_batch",
    "network_callable",
    "param_count",
    "param_count_bound",
    "theorem_architecture",
    "nll_and_gradient",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_MAGIC = b"PBMLPCK1"


@dataclass(frozen=True)
class MLPArchitecture:
    """Layer sizes: input d, hidden widths (length = depth), one output per action."""

    input_dim: int
    hidden_widths: tuple[int, ...]
    output_dim: int

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if self.input_dim < 1 or self.output_dim < 1:
            raise ConfigurationError("input and output dimensions must be positive")
        if len(self.hidden_widths) < 1 or any(w < 1 for w in self.hidden_widths):
            raise ConfigurationError("need at least one hidden layer of positive width")

    @property
    def depth(self) -> int:
        return len(self.hidden_widths)

    @property
    def width(self) -> int:
        return max(self.hidden_widths)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_widths, self.output_dim)

    @classmethod
    def rectangular(cls, d: int, width: int, depth: int, actions: int = 2) -> "MLPArchitecture":
        return cls(input_dim=d, hidden_widths=(width,) * depth, output_dim=actions)


@dataclass
class MLPParameters:
    """Weights H_i of shape (out_i, in_i) and biases b_i, one pair per affine layer."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    arch: MLPArchitecture

    def __post_init__(self):
        sizes = self.arch.layer_sizes
        expected = list(zip(sizes[1:], sizes[:-1]))
        got = [w.shape for w in self.weights]
        if got != expected or [b.shape for b in self.biases] != [(o,) for o, _ in expected]:
            raise ConfigurationError(f"parameter shapes {got} do not match {expected}")
        for arr in (*self.weights, *self.biases):
            if not np.all(np.isfinite(arr)):
                raise ConfigurationError("parameters must be finite")

    def copy(self) -> "MLPParameters":
        return MLPParameters(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            arch=self.arch,
        )


@dataclass
class MLPGradients:
    """Gradient arrays with the same shapes as the parameters they belong to."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


def init_params(arch: MLPArchitecture, rng: np.random.Generator) -> MLPParameters:
    """He-scheme initialization: H ~ N(0, 2/fan_in), biases zero."""
    weights, biases = [], []
    sizes = arch.layer_sizes
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MLPParameters(weights=weights, biases=biases, arch=arch)


def _forward_cached(params: MLPParameters, states: np.ndarray):
    """Centered batch forward; returns (centered outputs, per-layer activations)."""
    activations = [states]
    x = states
    for h, b in zip(params.weights[:-1], params.biases[:-1]):
        x = np.maximum(x @ h.T + b, 0.0)
        activations.append(x)
    raw = x @ params.weights[-1].T + params.biases[-1]
    centered = raw - raw.mean(axis=1, keepdims=True)
    return centered, activations


def forward_batch(params: MLPParameters, states: np.ndarray) -> np.ndarray:
    """Centered rewards for an (n, d) batch of states; shape (n, |A|)."""
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[1] != params.arch.input_dim:
        raise DomainError(f"states must be (n, {params.arch.input_dim})")
    centered, _ = _forward_cached(params, states)
    return centered


def forward(params: MLPParameters, s) -> np.ndarray:
    """Centered rewards for a single state; the output sums to zero."""
    s_arr = np.asarray(s, dtype=float).ravel()
    if s_arr.shape[0] != params.arch.input_dim:
        raise DomainError(f"state must have length {params.arch.input_dim}")
    return forward_batch(params, s_arr.reshape(1, -1))[0]


def network_callable(params: MLPParameters):
    """The network as a batch reward function (n, d) -> (n, |A|)."""
    return lambda states: forward_batch(params, np.asarray(states, dtype=float))


def param_count(arch: MLPArchitecture) -> int:
    """Exact number of scalar parameters, by shape enumeration."""
    sizes = arch.layer_sizes
    return sum(o * i + o for i, o in zip(sizes[:-1], sizes[1:]))


def param_count_bound(width: int, depth: int, d: int) -> int:
    """The printed bound W(d+1) + (W^2+W)(D-1) + W + 1 for single-output nets."""
    return width * (d + 1) + (width**2 + width) * (depth - 1) + width + 1


def theorem_architecture(d: int, beta: float, n: int) -> tuple[int, int]:
    """Width/depth prescribed by the regret-rate theory (reporting helper).

    W = 114 (floor(beta)+1)^2 d^(floor(beta)+1)
    D = 21  (floor(beta)+1)^2 ceil(N^(d/(2d+4beta)) * log2(8 N^(d/(2d+4beta))))

    These grow far beyond anything trained here; they are evaluated for
    reporting alongside empirical sweeps, not to size trainable networks.
    """
    if beta <= 0:
        raise DomainError("beta must be positive")
    if d < 1 or n < 1:
        raise DomainError("d and N must be at least 1")
    k = math.floor(beta) + 1
    width = 114 * k**2 * d**k
    m2 = float(n) ** (d / (2.0 * d + 4.0 * beta))
    depth = 21 * k**2 * math.ceil(m2 * math.log2(8.0 * m2))
    return int(width), int(depth)


def _batch_arrays(batch):
    """Accept a sample batch (array-backed) or a sequence of ComparisonSample."""
    if hasattr(batch, "states"):
        return (
            np.asarray(batch.states, dtype=float),
            np.asarray(batch.a1, dtype=np.int64),
            np.asarray(batch.a0, dtype=np.int64),
            np.asarray(batch.y, dtype=np.int64),
        )
    samples = list(batch)
    if not samples:
        raise DomainError("batch must be nonempty")
    states = np.stack([np.asarray(s.s, dtype=float) for s in samples])
    a1 = np.asarray([s.a1 for s in samples], dtype=np.int64)
    a0 = np.asarray([s.a0 for s in samples], dtype=np.int64)
    y = np.asarray([s.y for s in samples], dtype=np.int64)
    return states, a1, a0, y


def nll_and_gradient(
    params: MLPParameters, batch, model: ComparisonModel
) -> tuple[float, MLPGradients]:
    """Mean negative log-likelihood of a comparison batch and its exact gradient.

    Reverse-mode through: affine-ReLU chain -> action centering -> score
    difference u = r(s, a1) - r(s, a0) -> log g(y, u).
    """
    states, a1, a0, y = _batch_arrays(batch)
    if states.shape[0] == 0:
        raise DomainError("batch must be nonempty")
    n, n_actions = states.shape[0], params.arch.output_dim

    centered, activations = _forward_cached(params, states)
    idx = np.arange(n)
    u = centered[idx, a1] - centered[idx, a0]
    loss = -float(np.mean(log_density(model, y, u)))

    # d loss / d u, then scatter into the centered head
    g_u = -np.asarray(dlog_density_du(model, y, u)) / n
    g_centered = np.zeros((n, n_actions))
    np.add.at(g_centered, (idx, a1), g_u)
    np.add.at(g_centered, (idx, a0), -g_u)
    # centering is symmetric: its adjoint is centering again
    g = g_centered - g_centered.mean(axis=1, keepdims=True)

    grad_w = [np.empty(0)] * len(params.weights)
    grad_b = [np.empty(0)] * len(params.biases)
    grad_w[-1] = g.T @ activations[-1]
    grad_b[-1] = g.sum(axis=0)
    g = g @ params.weights[-1]
    for layer in range(len(params.weights) - 2, -1, -1):
        g = g * (activations[layer + 1] > 0.0)
        grad_w[layer] = g.T @ activations[layer]
        grad_b[layer] = g.sum(axis=0)
        if layer > 0:
            g = g @ params.weights[layer]
    return loss, MLPGradients(weights=grad_w, biases=grad_b)


def save_checkpoint(params: MLPParameters, path: str) -> None:
    """Binary checkpoint: magic, little-endian int32 shape header, float64 data.

    Header ints: d, depth D, the D hidden widths, |A|.  Data: per affine
    layer, the weight matrix row-major then the bias vector.
    """
    arch = params.arch
    header = struct.pack(
        f"<{2 + arch.depth + 1}i", arch.input_dim, arch.depth, *arch.hidden_widths, arch.output_dim
    )
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(header)
        for h, b in zip(params.weights, params.biases):
            fh.write(np.ascontiguousarray(h, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_checkpoint(path: str) -> MLPParameters:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CHECKPOINT_MAGIC:
            raise ConfigurationError(f"{path} is not a reward-network checkpoint")
        d, depth = struct.unpack("<2i", fh.read(8))
        widths = struct.unpack(f"<{depth}i", fh.read(4 * depth))
        (actions,) = struct.unpack("<i", fh.read(4))
        arch = MLPArchitecture(input_dim=d, hidden_widths=widths, output_dim=actions)
        weights, biases = [], []
        sizes = arch.layer_sizes
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            w = np.frombuffer(fh.read(8 * fan_out * fan_in), dtype="<f8")
            weights.append(w.reshape(fan_out, fan_in).astype(float))
            biases.append(np.frombuffer(fh.read(8 * fan_out), dtype="<f8").astype(float))
        trailing = fh.read(1)
    if trailing:
        raise ConfigurationError(f"{path} has trailing bytes beyond the declared shape")
    return MLPParameters(weights=weights, biases=biases, arch=arch)
