"""Fully connected leaky-ReLU network with hand-written backprop and Adam.

The topology is fixed to ``j -> h1 -> h2 -> z``: two leaky-ReLU hidden
layers and a linear output layer. Everything works in float64 on explicit
parameter containers, so forward/backward are pure functions.

Checkpoint format (``save_params`` / ``load_params``)::

    bytes 0..7    magic  b"CCMLP\\x00\\x01\\x00" (last two bytes: format version)
    uint32 LE     number of layer sizes n
    n x uint32 LE layer sizes
    float64 LE    for each layer: weights (rows = inputs, row-major), then biases
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"CCMLP\x00\x01\x00"


@dataclass
class MlpParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def zeros_like(self) -> "MlpParams":
        return MlpParams([np.zeros_like(w) for w in self.weights],
                         [np.zeros_like(b) for b in self.biases])

    def equals(self, other: "MlpParams") -> bool:
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))


@dataclass
class AdamState:
    m: MlpParams
    v: MlpParams
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    eta: float = 1e-3

    @classmethod
    def for_params(cls, params: MlpParams, **kwargs) -> "AdamState":
        return cls(m=params.zeros_like(), v=params.zeros_like(), **kwargs)


@dataclass
class ForwardTrace:
    inputs: list[np.ndarray] = field(default_factory=list)  # input to each layer
    pre: list[np.ndarray] = field(default_factory=list)     # pre-activation of each layer
    alpha: float = 0.01


def init_kaiming(rng: np.random.Generator, sizes) -> MlpParams:
    """He-normal weights, N(0, 2 / fan_in); zero biases."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2 or min(sizes) < 1:
        raise ValueError(f"need at least two positive layer sizes, got {sizes}")
    weights = [rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, n_out))
               for n_in, n_out in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(n_out) for n_out in sizes[1:]]
    return MlpParams(weights, biases)


def leaky_relu(x, alpha: float = 0.01):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, x, alpha * x)


def leaky_relu_grad(x, alpha: float = 0.01):
    # slope at exactly 0 is taken as 1
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, 1.0, alpha)


def forward(params: MlpParams, x, alpha: float = 0.01) -> tuple[np.ndarray, ForwardTrace]:
    """Q-values for a single state (shape ``(j,)``) or a batch (shape ``(n, j)``)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.ndim != 2 or h.shape[1] != params.weights[0].shape[0]:
        raise ValueError(f"input shape {x.shape} does not match input width "
                         f"{params.weights[0].shape[0]}")
    trace = ForwardTrace(alpha=alpha)
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        trace.inputs.append(h)
        a = h @ W + b
        trace.pre.append(a)
        h = a if i == last else np.where(a >= 0, a, alpha * a)
    return (h[0] if single else h), trace


def predict(params: MlpParams, x, alpha: float = 0.01) -> np.ndarray:
    return forward(params, x, alpha)[0]


def mse_loss_and_grad(q_pred, actions, targets) -> tuple[float, np.ndarray]:
    """Mean squared TD error over the taken actions only.

    The returned gradient has the shape of ``q_pred`` and is zero at every
    output except each sample's taken action.
    """
    q_pred = np.atleast_2d(np.asarray(q_pred, dtype=float))
    actions = np.asarray(actions, dtype=int).reshape(-1)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    n = q_pred.shape[0]
    if actions.shape[0] != n or targets.shape[0] != n:
        raise ValueError("q_pred, actions and targets must share the batch dimension")
    rows = np.arange(n)
    diff = q_pred[rows, actions] - targets
    grad = np.zeros_like(q_pred)
    grad[rows, actions] = 2.0 * diff / n
    return float(np.mean(diff ** 2)), grad


def backward(params: MlpParams, trace: ForwardTrace, dq) -> MlpParams:
    dq = np.asarray(dq, dtype=float)
    delta = dq[None, :] if dq.ndim == 1 else dq
    if delta.shape != trace.pre[-1].shape:
        raise ValueError(f"upstream gradient shape {dq.shape} does not match output "
                         f"{trace.pre[-1].shape}")
    n_layers = len(params.weights)
    gw: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    for i in range(n_layers - 1, -1, -1):
        if i != n_layers - 1:
            delta = delta * np.where(trace.pre[i] >= 0, 1.0, trace.alpha)
        gw[i] = trace.inputs[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i:
            delta = delta @ params.weights[i].T
    return MlpParams(gw, gb)


def adam_step(params: MlpParams, grads: MlpParams, adam: AdamState) -> MlpParams:
    """One bias-corrected Adam update, applied in place; returns ``params``."""
    adam.step += 1
    b1, b2 = adam.beta1, adam.beta2
    c1 = 1.0 - b1 ** adam.step
    c2 = 1.0 - b2 ** adam.step
    for p, g, m, v in zip(params.arrays(), grads.arrays(), adam.m.arrays(), adam.v.arrays()):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= adam.eta * (m / c1) / (np.sqrt(v / c2) + adam.epsilon)
    return params


def lr_schedule(episode: int, eta0: float = 4e-4, period: int = 500) -> float:
    """Step decay: halve the rate every ``period`` episodes (0-based count)."""
    if episode < 0:
        raise ValueError("episode must be >= 0")
    return eta0 * 0.5 ** (episode // period)


def save_params(params: MlpParams, path) -> None:
    sizes = params.sizes
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(sizes)))
        fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
        for w, b in zip(params.weights, params.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_params(path) -> MlpParams:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a network checkpoint (bad magic header)")
    off = len(MAGIC)
    (n,) = struct.unpack_from("<I", data, off)
    off += 4
    sizes = struct.unpack_from(f"<{n}I", data, off)
    off += 4 * n
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        w = np.frombuffer(data, dtype="<f8", count=n_in * n_out, offset=off).reshape(n_in, n_out)
        off += 8 * n_in * n_out
        b = np.frombuffer(data, dtype="<f8", count=n_out, offset=off)
        off += 8 * n_out
        weights.append(w.astype(float))
        biases.append(b.astype(float))
    if off != len(data):
        raise ValueError(f"{path}: trailing bytes after parameters")
    return MlpParams(weights, biases)
