"""Dense networks with hand-written reverse-mode gradients, plus Adam.

Everything downstream (Cutting Net, branch/trunk nets) trains through the
functions in this module. All arithmetic is float64 and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError, ShapeError, UsageError

ACTIVATIONS = ("tanh", "relu")
LOSSES = ("mse", "l1")


@dataclass(frozen=True)
class MlpParams:
    """Parameter bundle of a fully connected network.

    weights[k] has shape (layer_sizes[k+1], layer_sizes[k]); biases[k] has
    length layer_sizes[k+1]. Hidden layers use `activation`, the output
    layer is linear.
    """

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    activation: str = "tanh"

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


@dataclass(frozen=True)
class Grads:
    """Gradient bundle mirroring the shapes of an MlpParams."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class AdamState:
    step_count: int
    m_weights: tuple[np.ndarray, ...]
    v_weights: tuple[np.ndarray, ...]
    m_biases: tuple[np.ndarray, ...]
    v_biases: tuple[np.ndarray, ...]
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


@dataclass(frozen=True)
class Batch:
    """Training rows: inputs (n, in_width), targets (n,) or (n, out_width)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if self.inputs.ndim != 2:
            raise ShapeError("batch inputs must be 2D (n_points, input_width)")
        if self.targets.shape[0] != self.inputs.shape[0]:
            raise ShapeError(
                f"batch rows disagree: {self.inputs.shape[0]} inputs vs "
                f"{self.targets.shape[0]} targets"
            )
        if self.inputs.shape[0] == 0:
            raise UsageError("empty batch")


def mlp_init(layer_sizes, activation: str = "tanh", seed: int = 0) -> MlpParams:
    """Glorot-style init: zero-mean normals with variance 1/fan_in, zero biases."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2:
        raise ConfigError(f"need at least input and output layer, got {sizes}")
    if any(s < 1 for s in sizes):
        raise ConfigError(f"layer sizes must be positive, got {sizes}")
    if activation not in ACTIVATIONS:
        raise ConfigError(f"unknown activation {activation!r}")
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(1.0 / fan_in), size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(sizes, tuple(weights), tuple(biases), activation)


def _apply_activation(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "tanh":
        return np.tanh(z)
    return np.maximum(z, 0.0)


def forward_cached(params: MlpParams, x: np.ndarray) -> list[np.ndarray]:
    """Forward pass on a batch (n, in_width); returns all layer activations.

    The returned list has the input first and the (linear) output last, which
    is exactly what backward() consumes.
    """
    if x.ndim != 2 or x.shape[1] != params.layer_sizes[0]:
        raise ShapeError(
            f"input width {x.shape[-1] if x.ndim else '?'} does not match "
            f"network input {params.layer_sizes[0]}"
        )
    acts = [x]
    a = x
    last = params.n_layers - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        if not np.all(np.isfinite(z)):
            raise NumericError(f"non-finite values in forward pass at layer {k}")
        a = z if k == last else _apply_activation(z, params.activation)
        acts.append(a)
    return acts


def backward(params: MlpParams, acts: list[np.ndarray], d_out: np.ndarray):
    """Reverse-mode pass given dL/d(output); returns (Grads, dL/d(input))."""
    g_w = [None] * params.n_layers
    g_b = [None] * params.n_layers
    delta = d_out
    for k in range(params.n_layers - 1, -1, -1):
        g_w[k] = delta.T @ acts[k]
        g_b[k] = delta.sum(axis=0)
        if k > 0:
            da = delta @ params.weights[k]
            a = acts[k]  # post-activation of layer k-1
            if params.activation == "tanh":
                delta = da * (1.0 - a * a)
            else:
                delta = da * (a > 0.0)
        else:
            delta = delta @ params.weights[0]
    return Grads(tuple(g_w), tuple(g_b)), delta


def mlp_forward_batch(params: MlpParams, x: np.ndarray) -> np.ndarray:
    return forward_cached(params, x)[-1]


def mlp_forward(params: MlpParams, x) -> np.ndarray:
    """Evaluate the network on a single input vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError("mlp_forward expects a 1D input vector")
    return forward_cached(params, x[None, :])[-1][0]


def loss_and_dpred(pred: np.ndarray, targets: np.ndarray, loss: str):
    """Mean loss over all entries and its gradient w.r.t. the predictions."""
    if loss not in LOSSES:
        raise ConfigError(f"unknown loss {loss!r}")
    r = pred - targets
    n = r.size
    if loss == "mse":
        return float(np.mean(r * r)), (2.0 / n) * r
    # l1 with subgradient 0 at zero residual
    return float(np.mean(np.abs(r))), np.sign(r) / n


def mlp_value_and_grad(params: MlpParams, batch: Batch, loss: str = "mse"):
    """Batch-averaged loss and exact reverse-mode gradients."""
    targets = np.asarray(batch.targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    out_width = params.layer_sizes[-1]
    if targets.shape[1] != out_width:
        raise ShapeError(
            f"target width {targets.shape[1]} does not match output width {out_width}"
        )
    acts = forward_cached(params, np.asarray(batch.inputs, dtype=float))
    value, d_pred = loss_and_dpred(acts[-1], targets, loss)
    grads, _ = backward(params, acts, d_pred)
    return value, grads


def adam_init(params: MlpParams, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, epsilon: float = 1e-8) -> AdamState:
    zeros_w = tuple(np.zeros_like(w) for w in params.weights)
    zeros_b = tuple(np.zeros_like(b) for b in params.biases)
    return AdamState(0, zeros_w, zeros_w, zeros_b, zeros_b, lr, beta1, beta2, epsilon)


def adam_step(params: MlpParams, grads: Grads, state: AdamState,
              lr: float | None = None):
    """One Adam update with bias correction; returns new (params, state)."""
    if len(grads.weights) != params.n_layers:
        raise ShapeError("gradient bundle does not match network depth")
    for w, g in zip(params.weights, grads.weights):
        if w.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} != weight shape {w.shape}")
    lr = state.lr if lr is None else lr
    t = state.step_count + 1
    b1, b2, eps = state.beta1, state.beta2, state.epsilon
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t

    def upd(p, g, m, v):
        m_new = b1 * m + (1.0 - b1) * g
        v_new = b2 * v + (1.0 - b2) * g * g
        p_new = p - lr * (m_new / c1) / (np.sqrt(v_new / c2) + eps)
        return p_new, m_new, v_new

    new_w, m_w, v_w = [], [], []
    for p, g, m, v in zip(params.weights, grads.weights, state.m_weights, state.v_weights):
        a, b, c = upd(p, g, m, v)
        new_w.append(a); m_w.append(b); v_w.append(c)
    new_b, m_b, v_b = [], [], []
    for p, g, m, v in zip(params.biases, grads.biases, state.m_biases, state.v_biases):
        a, b, c = upd(p, g, m, v)
        new_b.append(a); m_b.append(b); v_b.append(c)

    new_params = MlpParams(params.layer_sizes, tuple(new_w), tuple(new_b),
                           params.activation)
    new_state = AdamState(t, tuple(m_w), tuple(v_w), tuple(m_b), tuple(v_b),
                          state.lr, b1, b2, eps)
    return new_params, new_state


@dataclass(frozen=True)
class Standardizer:
    """Per-feature affine map x -> (x - mean) / scale with exact inverse."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        x = np.asarray(x, dtype=float)
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale = np.where(scale < 1e-12, 1.0, scale)
        return cls(mean, scale)

    @classmethod
    def identity(cls, width: int) -> "Standardizer":
        return cls(np.zeros(width), np.ones(width))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.scale

    def invert(self, z: np.ndarray) -> np.ndarray:
        return z * self.scale + self.mean
