"""Layers, losses, metrics and the Adam optimizer.

Layer functions take a :class:`ComputeGraph`, an input node and a parameter
bundle, register the bundle's arrays as graph parameters under ``name/...``
and return the output node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import DomainError, NonFiniteGradient, ShapeMismatch, SingleClass, ZeroTarget
from .tensor_engine import ComputeGraph, Node, forward_eval

ACTIVATIONS = ("relu", "sigmoid", "tanh", "linear")
BCE_CLAMP = 1e-7


def _activate(g: ComputeGraph, x: Node, activation: str, name=None) -> Node:
    if activation == "linear":
        return x
    if activation not in ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    return getattr(g, activation)(x, name=name)


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


# --- dense ------------------------------------------------------------------


@dataclass
class DenseParams:
    weights: np.ndarray  # (in, out)
    bias: np.ndarray  # (out,)
    activation: str = "linear"

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise ShapeMismatch(f"dense weights {self.weights.shape} and bias {self.bias.shape} disagree")


def init_dense(rng, n_in: int, n_out: int, activation: str = "linear") -> DenseParams:
    return DenseParams(_uniform(rng, n_in, (n_in, n_out)), np.zeros(n_out), activation)


def dense_forward(g: ComputeGraph, x: Node, p: DenseParams, name: str) -> Node:
    w = g.parameter(f"{name}/W", p.weights)
    b = g.parameter(f"{name}/b", p.bias)
    return _activate(g, g.bias_add(g.matmul(x, w), b), p.activation, name=f"{name}/out")


# --- conv1d -----------------------------------------------------------------


@dataclass
class Conv1DParams:
    kernels: np.ndarray  # (kernel_size, in_channels, filters)
    bias: np.ndarray  # (filters,)
    activation: str = "relu"
    padding: str = field(default="same", init=False)

    @property
    def kernel_size(self) -> int:
        return self.kernels.shape[0]

    def __post_init__(self):
        if self.kernels.ndim != 3 or self.bias.shape != (self.kernels.shape[2],):
            raise ShapeMismatch(f"conv kernels {self.kernels.shape} and bias {self.bias.shape} disagree")


def init_conv1d(rng, kernel_size: int, in_channels: int, filters: int, activation: str = "relu") -> Conv1DParams:
    fan_in = kernel_size * in_channels
    return Conv1DParams(_uniform(rng, fan_in, (kernel_size, in_channels, filters)), np.zeros(filters), activation)


def conv1d_same_forward(g: ComputeGraph, x: Node, p: Conv1DParams, name: str) -> Node:
    w = g.parameter(f"{name}/K", p.kernels)
    b = g.parameter(f"{name}/b", p.bias)
    return _activate(g, g.bias_add(g.conv1d_same(x, w), b), p.activation, name=f"{name}/out")


# --- recurrent --------------------------------------------------------------

GATES = {"gru": 3, "lstm": 4}


@dataclass
class RecurrentParams:
    """Gate blocks are concatenated along the last axis.

    LSTM order: input, forget, candidate, output.
    GRU order: update, reset, candidate.
    """

    cell_kind: str
    input_weights: np.ndarray  # (features, gates*hidden)
    recurrent_weights: np.ndarray  # (hidden, gates*hidden)
    biases: np.ndarray  # (gates*hidden,)

    def __post_init__(self):
        if self.cell_kind not in GATES:
            raise ValueError(f"cell_kind must be 'gru' or 'lstm', got {self.cell_kind!r}")
        h = self.hidden_size
        width = GATES[self.cell_kind] * h
        if (
            self.input_weights.ndim != 2
            or self.input_weights.shape[1] != width
            or self.recurrent_weights.shape != (h, width)
            or self.biases.shape != (width,)
        ):
            raise ShapeMismatch(f"inconsistent {self.cell_kind} parameter shapes")

    @property
    def hidden_size(self) -> int:
        return self.recurrent_weights.shape[0]


def init_recurrent(rng, cell_kind: str, n_features: int, hidden: int) -> RecurrentParams:
    width = GATES[cell_kind] * hidden
    biases = np.zeros(width)
    if cell_kind == "lstm":
        biases[hidden : 2 * hidden] = 1.0
    return RecurrentParams(
        cell_kind,
        _uniform(rng, n_features, (n_features, width)),
        _uniform(rng, hidden, (hidden, width)),
        biases,
    )


def recurrent_forward(
    g: ComputeGraph,
    x: Node,
    p: RecurrentParams,
    name: str,
    return_sequence: bool = False,
    mask: Node | None = None,
) -> Node:
    """Unrolled GRU/LSTM over axis 1 of ``x`` (batch, length, features), zero initial state.

    ``mask`` is an optional (batch, length) 0/1 input; where it is 0 the state is
    carried through unchanged, so post-padding does not dilute the final state.
    """
    if len(x.shape) != 3 or x.shape[1] is None:
        raise ShapeMismatch(f"recurrent input must be (batch, length, features), got {x.shape}")
    _, length, feats = x.shape
    h_size = p.hidden_size
    n_gates = GATES[p.cell_kind]
    width = n_gates * h_size
    w_in = g.parameter(f"{name}/W", p.input_weights)
    w_rec = g.parameter(f"{name}/U", p.recurrent_weights)
    bias = g.parameter(f"{name}/b", p.biases)

    flat = g.reshape(x, (-1, feats))
    projected = g.reshape(g.bias_add(g.matmul(flat, w_in), bias), (-1, length, width))

    def gate(z, k):
        return g.slice(z, -1, k * h_size, (k + 1) * h_size)

    keep = None
    if mask is not None:
        if mask.shape[1:] != (length,):
            raise ShapeMismatch(f"mask shape {mask.shape} does not match length {length}")
        column = g.reshape(mask, (-1, length, 1))
        keep = g.concat([column] * h_size, name=f"{name}/mask")  # (batch, length, hidden)

    def carry(t, new, old):
        if keep is None:
            return new
        m = g.slice(keep, 1, t, t + 1, squeeze=True)
        if old is None:
            return g.mul(m, new)
        return g.add(old, g.mul(m, g.sub(new, old)))

    outputs = []
    h = c = None
    if p.cell_kind == "lstm":
        for t in range(length):
            z = g.slice(projected, 1, t, t + 1, squeeze=True)
            if h is not None:
                z = g.add(z, g.matmul(h, w_rec))
            i, cand, o = g.sigmoid(gate(z, 0)), g.tanh(gate(z, 2)), g.sigmoid(gate(z, 3))
            if c is None:
                c_new = g.mul(i, cand)
            else:
                c_new = g.add(g.mul(g.sigmoid(gate(z, 1)), c), g.mul(i, cand))
            h_new = g.mul(o, g.tanh(c_new))
            c, h = carry(t, c_new, c), carry(t, h_new, h)
            outputs.append(h)
    else:
        u_zr = g.slice(w_rec, 1, 0, 2 * h_size)
        u_h = g.slice(w_rec, 1, 2 * h_size, 3 * h_size)
        for t in range(length):
            xt = g.slice(projected, 1, t, t + 1, squeeze=True)
            if h is None:
                z = g.sigmoid(gate(xt, 0))
                cand = g.tanh(gate(xt, 2))
                h = carry(t, g.mul(g.affine(z, -1.0, 1.0), cand), None)
            else:
                hzr = g.matmul(h, u_zr)
                z = g.sigmoid(g.add(gate(xt, 0), gate(hzr, 0)))
                r = g.sigmoid(g.add(gate(xt, 1), gate(hzr, 1)))
                cand = g.tanh(g.add(gate(xt, 2), g.matmul(g.mul(r, h), u_h)))
                h = carry(t, g.add(g.mul(z, h), g.mul(g.affine(z, -1.0, 1.0), cand)), h)
            outputs.append(h)
    if return_sequence:
        return g.stack(outputs, axis=1, name=f"{name}/seq")
    return g.affine(h, name=f"{name}/out")


# --- embedding --------------------------------------------------------------


@dataclass
class EmbeddingParams:
    table: np.ndarray  # (vocab_size + 1, embed_dim); row 0 is the pad row
    pad_index: int = field(default=0, init=False)

    def __post_init__(self):
        if self.table.ndim != 2:
            raise ShapeMismatch("embedding table must be 2-D")
        self.table = np.array(self.table, dtype=np.float64)
        self.table[0] = 0.0


def init_embedding(rng, vocab_size: int, embed_dim: int) -> EmbeddingParams:
    return EmbeddingParams(rng.uniform(-0.05, 0.05, size=(vocab_size + 1, embed_dim)))


def embedding_forward(g: ComputeGraph, indices: Node, p: EmbeddingParams, name: str) -> Node:
    table = g.parameter(f"{name}/table", p.table)
    return g.embedding(table, indices, pad_index=p.pad_index, name=f"{name}/out")


# --- losses -----------------------------------------------------------------


def loss_node(g: ComputeGraph, pred: Node, target: Node, kind: str, name: str = "loss") -> Node:
    if kind == "mse":
        d = g.sub(pred, target)
        return g.mean(g.mul(d, d), name=name)
    if kind == "bce":
        p = g.clip(pred, BCE_CLAMP, 1.0 - BCE_CLAMP, domain=(0.0, 1.0))
        pos = g.mul(target, g.log(p))
        neg = g.mul(g.affine(target, -1.0, 1.0), g.log(g.affine(p, -1.0, 1.0)))
        return g.affine(g.mean(g.add(pos, neg)), -1.0, name=name)
    raise ValueError(f"unknown loss kind {kind!r}")


def compute_loss(pred, target, kind: str) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeMismatch(f"prediction {pred.shape} and target {target.shape} differ")
    if kind == "bce" and not np.isin(target, (0.0, 1.0)).all():
        raise DomainError("bce targets must be 0 or 1")
    g = ComputeGraph()
    p = g.input("pred", pred.shape)
    t = g.input("target", target.shape)
    loss = loss_node(g, p, t, kind)
    return float(forward_eval(g, {"pred": pred, "target": target})[loss.name])


# --- metrics ----------------------------------------------------------------


def mape(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    if pred.shape != target.shape:
        raise ShapeMismatch(f"prediction {pred.shape} and target {target.shape} differ")
    if (target == 0).any():
        raise ZeroTarget("MAPE is undefined for zero targets")
    return float(np.mean(np.abs(target - pred) / np.abs(target)) * 100.0)


def roc_auc(pred, target) -> float:
    """Mann-Whitney form: P(score_pos > score_neg) + 0.5 P(tie)."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    target = np.asarray(target).ravel()
    if pred.shape != target.shape:
        raise ShapeMismatch(f"prediction {pred.shape} and target {target.shape} differ")
    pos = target == 1
    n_pos = int(pos.sum())
    n_neg = int((target == 0).sum())
    if n_pos + n_neg != target.size:
        raise DomainError("AUC targets must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes")
    ranks = rankdata(pred)  # ties get the average rank
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def compute_metric(pred, target, kind: str) -> float:
    if kind == "mape":
        return mape(pred, target)
    if kind == "auc":
        return roc_auc(pred, target)
    raise ValueError(f"unknown metric kind {kind!r}")


# --- Adam -------------------------------------------------------------------


@dataclass
class AdamState:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)
    # parameter name -> row indices kept at zero (embedding pad rows)
    frozen_rows: dict[str, tuple[int, ...]] = field(default_factory=dict)


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState):
    """One bias-corrected Adam update, applied to ``params`` in place."""
    for name, grad in grads.items():
        if not np.isfinite(grad).all():
            raise NonFiniteGradient(f"gradient of {name!r} contains NaN or Inf")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**t
    correction2 = 1.0 - b2**t
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape:
            raise ShapeMismatch(f"gradient of {name!r} has shape {grad.shape}, parameter {value.shape}")
        m = state.first_moment.get(name)
        if m is None:
            m = state.first_moment[name] = np.zeros_like(value)
            state.second_moment[name] = np.zeros_like(value)
        v = state.second_moment[name]
        m *= b1
        m += (1.0 - b1) * grad
        v *= b2
        v += (1.0 - b2) * grad * grad
        value -= state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)
        for row in state.frozen_rows.get(name, ()):
            value[row] = 0.0
    return params, state
