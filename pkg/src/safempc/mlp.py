"""Feedforward ReLU networks used as dynamics models xdot = f(x, u).

Hidden layers use ReLU, the output layer is linear (a ReLU output could
never produce negative derivative components, which the unicycle needs).
Networks are immutable after construction; training returns a new network.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MlpNetwork",
    "ForwardTrace",
    "Dataset",
    "DimensionError",
    "ModelFormatError",
    "TrainingDivergenceError",
    "init_network",
    "forward",
    "train",
    "gradient_check",
    "save_model",
    "load_model",
    "lipschitz_upper_bound",
]


class DimensionError(ValueError):
    """Input dimensions do not match the network."""


class ModelFormatError(ValueError):
    """A model file is malformed or internally inconsistent."""


class TrainingDivergenceError(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class MlpNetwork:
    """Weights of an n-layer ReLU network mapping [x, u] to xdot.

    ``weights[i]`` has shape (k_{i+1}, k_i) where k_0 = state_dim +
    control_dim and the last layer has state_dim rows.
    """

    weights: tuple
    biases: tuple
    state_dim: int
    control_dim: int

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise DimensionError("need one bias vector per weight matrix")
        prev = self.state_dim + self.control_dim
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1:
                raise DimensionError(f"layer {i}: expected matrix and vector")
            if w.shape[1] != prev:
                raise DimensionError(
                    f"layer {i}: {w.shape[1]} columns, expected {prev}"
                )
            if b.shape[0] != w.shape[0]:
                raise DimensionError(
                    f"layer {i}: bias length {b.shape[0]} != {w.shape[0]} rows"
                )
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise DimensionError(f"layer {i}: non-finite parameters")
            prev = w.shape[0]
        if prev != self.state_dim:
            raise DimensionError(
                f"output dimension {prev} != state dimension {self.state_dim}"
            )

    @property
    def layer_count(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.state_dim + self.control_dim

    @property
    def layer_widths(self) -> tuple:
        return tuple(w.shape[0] for w in self.weights)

    def hidden_widths(self) -> tuple:
        return self.layer_widths[:-1]


@dataclass(frozen=True)
class ForwardTrace:
    """Per-layer pre- and post-activation values of one forward pass."""

    inputs: np.ndarray
    pre: tuple
    post: tuple


@dataclass(frozen=True)
class Dataset:
    """Training records (x, u, xdot), dimension-consistent by construction."""

    states: np.ndarray
    controls: np.ndarray
    derivs: np.ndarray

    def __post_init__(self):
        n = self.states.shape[0]
        if self.controls.shape[0] != n or self.derivs.shape[0] != n:
            raise DimensionError("dataset arrays have mismatched lengths")
        if self.derivs.shape[1] != self.states.shape[1]:
            raise DimensionError("derivative width != state width")

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def control_dim(self) -> int:
        return self.controls.shape[1]

    def csv_header(self) -> str:
        mx, mu = self.state_dim, self.control_dim
        cols = (
            [f"x{i}" for i in range(mx)]
            + [f"u{i}" for i in range(mu)]
            + [f"xdot{i}" for i in range(mx)]
        )
        return ",".join(cols)

    def to_csv(self, path) -> None:
        rows = np.hstack([self.states, self.controls, self.derivs])
        with open(path, "w") as fh:
            fh.write(self.csv_header() + "\n")
            for row in rows:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            data = np.array(
                [[float(v) for v in line.split(",")] for line in fh if line.strip()]
            )
        mx = sum(1 for c in header if c.startswith("x") and not c.startswith("xdot"))
        mu = sum(1 for c in header if c.startswith("u"))
        if data.ndim != 2 or data.shape[1] != 2 * mx + mu:
            raise ModelFormatError("dataset CSV width does not match header")
        return cls(data[:, :mx], data[:, mx : mx + mu], data[:, mx + mu :])


def init_network(state_dim, control_dim, hidden, seed=0) -> MlpNetwork:
    """Create a network with Glorot-uniform weights, seedable."""
    rng = np.random.default_rng(seed)
    dims = [state_dim + control_dim, *hidden, state_dim]
    weights, biases = [], []
    for k_in, k_out in zip(dims[:-1], dims[1:]):
        bound = math.sqrt(6.0 / (k_in + k_out))
        weights.append(rng.uniform(-bound, bound, size=(k_out, k_in)))
        biases.append(np.zeros(k_out))
    return MlpNetwork(tuple(weights), tuple(biases), state_dim, control_dim)


def _stack_input(net: MlpNetwork, x, u) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape[-1] != net.state_dim:
        raise DimensionError(f"state has {x.shape[-1]} entries, expected {net.state_dim}")
    if u.shape[-1] != net.control_dim:
        raise DimensionError(
            f"control has {u.shape[-1]} entries, expected {net.control_dim}"
        )
    return np.concatenate([x, u], axis=-1)


def forward(net: MlpNetwork, x, u):
    """Evaluate the network; returns (xdot, trace).

    Accepts single inputs of shape (m_x,), (m_u,) or batches (N, m_x),
    (N, m_u); the trace mirrors the input shape.
    """
    z = _stack_input(net, x, u)
    inputs = z
    pre, post = [], []
    last = net.layer_count - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        zhat = z @ w.T + b
        pre.append(zhat)
        z = zhat if i == last else np.maximum(zhat, 0.0)
        post.append(z)
    return z, ForwardTrace(inputs, tuple(pre), tuple(post))


def evaluate(net: MlpNetwork, x, u) -> np.ndarray:
    """Forward pass without keeping the trace."""
    z = _stack_input(net, x, u)
    last = net.layer_count - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = z @ w.T + b
        if i != last:
            np.maximum(z, 0.0, out=z)
    return z


def mse(net: MlpNetwork, data: Dataset) -> float:
    pred = evaluate(net, data.states, data.controls)
    return float(np.mean((pred - data.derivs) ** 2))


def _loss_and_grads(weights, biases, xin, y):
    """MSE loss and its gradient w.r.t. every weight and bias."""
    acts = [xin]
    pres = []
    z = xin
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        zhat = z @ w.T + b
        pres.append(zhat)
        z = zhat if i == last else np.maximum(zhat, 0.0)
        acts.append(z)
    err = acts[-1] - y
    loss = float(np.mean(err**2))
    scale = 2.0 / err.size
    delta = scale * err
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    for i in range(last, -1, -1):
        grads_w[i] = delta.T @ acts[i]
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i]) * (pres[i - 1] > 0.0)
    return loss, grads_w, grads_b


def train(
    net: MlpNetwork,
    data: Dataset,
    epochs=1000,
    batch_size=256,
    learning_rate=1e-3,
    seed=0,
    loss_callback=None,
) -> MlpNetwork:
    """Train with Adam on mean squared derivative error.

    Deterministic for a fixed seed. Raises TrainingDivergenceError with
    the epoch index if the loss stops being finite.
    """
    if len(data) == 0:
        raise ValueError("empty dataset")
    if data.state_dim != net.state_dim or data.control_dim != net.control_dim:
        raise DimensionError("dataset dimensions do not match the network")
    rng = np.random.default_rng(seed)
    weights = [w.copy() for w in net.weights]
    biases = [b.copy() for b in net.biases]
    params = weights + biases
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    xin = np.hstack([data.states, data.controls])
    y = data.derivs
    n = len(data)
    step = 0
    for epoch in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, batch_size):
            idx = order[lo : lo + batch_size]
            loss, gw, gb = _loss_and_grads(weights, biases, xin[idx], y[idx])
            if not math.isfinite(loss):
                raise TrainingDivergenceError(epoch)
            epoch_loss += loss * len(idx)
            step += 1
            for p, g, mi, vi in zip(params, gw + gb, m, v):
                mi *= beta1
                mi += (1 - beta1) * g
                vi *= beta2
                vi += (1 - beta2) * g * g
                mhat = mi / (1 - beta1**step)
                vhat = vi / (1 - beta2**step)
                p -= learning_rate * mhat / (np.sqrt(vhat) + eps)
        if loss_callback is not None:
            loss_callback(epoch, epoch_loss / n)
    return MlpNetwork(
        tuple(w.copy() for w in weights),
        tuple(b.copy() for b in biases),
        net.state_dim,
        net.control_dim,
    )


def gradient_check(net: MlpNetwork, data: Dataset, epsilon=1e-5) -> float:
    """Max relative error between backprop and central finite differences.

    Relative error uses max(|a|, |b|) as denominator; both sides below
    1e-8 count as exact agreement (covers the all-zero network).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    xin = np.hstack([data.states, data.controls])
    y = data.derivs
    weights = [w.copy() for w in net.weights]
    biases = [b.copy() for b in net.biases]
    _, gw, gb = _loss_and_grads(weights, biases, xin, y)
    worst = 0.0
    for arrs, grads in ((weights, gw), (biases, gb)):
        for arr, grad in zip(arrs, grads):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + epsilon
                lp, _, _ = _loss_and_grads(weights, biases, xin, y)
                flat[j] = orig - epsilon
                lm, _, _ = _loss_and_grads(weights, biases, xin, y)
                flat[j] = orig
                fd = (lp - lm) / (2 * epsilon)
                denom = max(abs(fd), abs(gflat[j]))
                if denom < 1e-8:
                    continue
                worst = max(worst, abs(fd - gflat[j]) / denom)
    return worst


def save_model(net: MlpNetwork, path) -> None:
    """Write the JSON model file; floats keep full round-trip precision."""
    doc = {
        "m_x": net.state_dim,
        "m_u": net.control_dim,
        "layers": [
            {
                "rows": int(w.shape[0]),
                "cols": int(w.shape[1]),
                "weights": [float(v) for v in w.reshape(-1)],
                "bias": [float(v) for v in b],
            }
            for w, b in zip(net.weights, net.biases)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> MlpNetwork:
    """Read a model file, validating every layer's shape."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not valid JSON: {exc}") from exc
    try:
        mx, mu = int(doc["m_x"]), int(doc["m_u"])
        layers = doc["layers"]
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"missing field: {exc}") from exc
    weights, biases = [], []
    for i, layer in enumerate(layers):
        try:
            rows, cols = int(layer["rows"]), int(layer["cols"])
            flat = np.asarray(layer["weights"], dtype=float)
            bias = np.asarray(layer["bias"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"layer {i}: {exc}") from exc
        if flat.size != rows * cols:
            raise ModelFormatError(
                f"layer {i}: {flat.size} weights, expected {rows * cols}"
            )
        if bias.size != rows:
            raise ModelFormatError(f"layer {i}: bias length {bias.size}, expected {rows}")
        weights.append(flat.reshape(rows, cols))
        biases.append(bias)
    try:
        return MlpNetwork(tuple(weights), tuple(biases), mx, mu)
    except DimensionError as exc:
        raise ModelFormatError(str(exc)) from exc


def _spectral_norm(w: np.ndarray, iters=50) -> float:
    """Largest singular value estimated by power iteration on W^T W."""
    if w.size == 0 or not np.any(w):
        return 0.0
    # deterministic start, tilted so it cannot be orthogonal to the top
    # singular vector for structured matrices like identities
    v = np.ones(w.shape[1]) + 1e-3 * np.arange(w.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        u = w @ v
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        v = w.T @ (u / nu)
        sigma = np.linalg.norm(v)
        if sigma == 0.0:
            return 0.0
        v /= sigma
    return float(sigma)


def lipschitz_upper_bound(net: MlpNetwork) -> float:
    """Product of per-layer spectral norms, a Lipschitz bound for ReLU nets.

    Power iteration converges to the spectral norm from below; the
    Frobenius norm caps each factor so a degenerate iteration can never
    report more than the guaranteed bound.
    """
    k = 1.0
    for w in net.weights:
        frob = float(np.linalg.norm(w))
        k *= min(_spectral_norm(w), frob) if frob > 0 else 0.0
    return k
