"""A small define-then-run reverse-mode autodiff engine on float64 numpy arrays.

A :class:`ComputeGraph` is built once from named inputs, parameters and
primitive ops; :func:`forward_eval` evaluates it for concrete bindings and
memoizes every node value, and :func:`backward_gradients` walks the nodes in
reverse to accumulate d(loss)/d(parameter).

Declared shapes may use ``None`` for the batch axis. Broadcasting is limited
to ``bias_add`` (a vector added over all leading axes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from .errors import DomainError, ForwardNotRun, IndexOutOfRange, NonFiniteValue, NotScalarLoss, ShapeMismatch, UnboundInput

Shape = tuple  # of int | None


def _dims_match(a, b) -> bool:
    return a is None or b is None or a == b


def _shapes_match(a: Shape, b: Shape) -> bool:
    return len(a) == len(b) and all(_dims_match(x, y) for x, y in zip(a, b))


def _require(cond: bool, msg: str):
    if not cond:
        raise ShapeMismatch(msg)


@dataclass(eq=False)
class Node:
    name: str
    op: str
    inputs: tuple["Node", ...]
    attrs: dict
    shape: Shape
    index: int
    graph: "ComputeGraph" = field(repr=False)

    @property
    def kind(self) -> str:
        return self.op if self.op in ("input", "parameter") else "op"


# --- op definitions ----------------------------------------------------------
# Each op: shape(in_shapes, attrs) -> shape
#          forward(values, attrs) -> (out, cache)
#          backward(grad_out, values, out, cache, attrs) -> list of input grads (None = no grad)


def _shape_matmul(s, a):
    (x, w) = s
    _require(len(x) == 2 and len(w) == 2, f"matmul needs 2-D operands, got {x} and {w}")
    _require(_dims_match(x[1], w[0]), f"matmul inner dims differ: {x} @ {w}")
    return (x[0], w[1])


def _fwd_matmul(v, a):
    return v[0] @ v[1], None


def _bwd_matmul(g, v, out, cache, a):
    return [g @ v[1].T, v[0].T @ g]


def _shape_same(s, a):
    _require(all(_shapes_match(s[0], t) for t in s[1:]), f"{a.get('_op')} operands differ in shape: {s}")
    return s[0]


def _check_same_runtime(v, op):
    if any(x.shape != v[0].shape for x in v[1:]):
        raise ShapeMismatch(f"{op} operands differ in shape at runtime: {[x.shape for x in v]}")


def _fwd_add(v, a):
    _check_same_runtime(v, "add")
    return v[0] + v[1], None


def _bwd_add(g, v, out, cache, a):
    return [g, g]


def _fwd_sub(v, a):
    _check_same_runtime(v, "sub")
    return v[0] - v[1], None


def _bwd_sub(g, v, out, cache, a):
    return [g, -g]


def _fwd_mul(v, a):
    _check_same_runtime(v, "mul")
    return v[0] * v[1], None


def _bwd_mul(g, v, out, cache, a):
    return [g * v[1], g * v[0]]


def _shape_unary(s, a):
    return s[0]


def _fwd_affine(v, a):
    return a["scale"] * v[0] + a["shift"], None


def _bwd_affine(g, v, out, cache, a):
    return [a["scale"] * g]


def _shape_bias_add(s, a):
    x, b = s
    _require(len(b) == 1 and len(x) >= 1 and _dims_match(x[-1], b[0]), f"bias_add: {x} + {b}")
    return x


def _fwd_bias_add(v, a):
    if v[0].shape[-1] != v[1].shape[0]:
        raise ShapeMismatch(f"bias_add: {v[0].shape} + {v[1].shape}")
    return v[0] + v[1], None


def _bwd_bias_add(g, v, out, cache, a):
    return [g, g.reshape(-1, g.shape[-1]).sum(axis=0)]


def _shape_concat(s, a):
    first = s[0]
    for t in s[1:]:
        _require(len(t) == len(first) and _shapes_match(t[:-1], first[:-1]), f"concat: incompatible {s}")
    last = None if any(t[-1] is None for t in s) else sum(t[-1] for t in s)
    return first[:-1] + (last,)


def _fwd_concat(v, a):
    if any(x.shape[:-1] != v[0].shape[:-1] for x in v):
        raise ShapeMismatch(f"concat: incompatible runtime shapes {[x.shape for x in v]}")
    return np.concatenate(v, axis=-1), [x.shape[-1] for x in v]


def _bwd_concat(g, v, out, widths, a):
    cuts = np.cumsum(widths)[:-1]
    return list(np.split(g, cuts, axis=-1))


def _shape_slice(s, a):
    x = s[0]
    ax = a["axis"] % len(x)
    dim = x[ax]
    _require(dim is not None, "slice along an unknown dimension")
    _require(0 <= a["start"] < a["stop"] <= dim, f"slice [{a['start']}:{a['stop']}] out of range for dim {dim}")
    if a["squeeze"]:
        _require(a["stop"] - a["start"] == 1, "squeeze needs a width-1 slice")
        return x[:ax] + x[ax + 1 :]
    return x[:ax] + (a["stop"] - a["start"],) + x[ax + 1 :]


def _slicer(ndim, a):
    ax = a["axis"] % ndim
    idx = [slice(None)] * ndim
    idx[ax] = a["start"] if a["squeeze"] else slice(a["start"], a["stop"])
    return tuple(idx)


def _fwd_slice(v, a):
    return v[0][_slicer(v[0].ndim, a)], None


def _bwd_slice(g, v, out, cache, a):
    gx = np.zeros_like(v[0])
    gx[_slicer(v[0].ndim, a)] = g
    return [gx]


def _shape_stack(s, a):
    _require(all(_shapes_match(s[0], t) for t in s), f"stack: incompatible {s}")
    ax = a["axis"]
    return s[0][:ax] + (len(s),) + s[0][ax:]


def _fwd_stack(v, a):
    _check_same_runtime(v, "stack")
    return np.stack(v, axis=a["axis"]), None


def _bwd_stack(g, v, out, cache, a):
    return [np.take(g, i, axis=a["axis"]) for i in range(len(v))]


def _shape_reshape(s, a):
    x = s[0]
    target = a["target"]
    _require(sum(t == -1 for t in target) <= 1, "reshape allows at most one -1")
    known = [d for d in x if d is not None]
    if None in x:
        _require(-1 in target, "reshape of a batch-polymorphic tensor needs a -1 dimension")
        return tuple(None if t == -1 else t for t in target)
    total = int(np.prod(known)) if known else 1
    rest = int(np.prod([t for t in target if t != -1])) if target else 1
    if -1 in target:
        _require(rest > 0 and total % rest == 0, f"cannot reshape {x} to {target}")
        return tuple(total // rest if t == -1 else t for t in target)
    _require(rest == total, f"cannot reshape {x} to {target}")
    return tuple(target)


def _fwd_reshape(v, a):
    try:
        return v[0].reshape(a["target"]), None
    except ValueError as exc:
        raise ShapeMismatch(str(exc)) from None


def _bwd_reshape(g, v, out, cache, a):
    return [g.reshape(v[0].shape)]


def _shape_conv(s, a):
    x, w = s
    _require(len(x) == 3 and len(w) == 3, f"conv1d_same needs (B,L,C) and (K,C,F), got {x}, {w}")
    _require(_dims_match(x[2], w[1]), f"conv1d_same channel mismatch: {x} vs {w}")
    return (x[0], x[1], w[2])


def _conv_pads(k):
    left = (k - 1) // 2
    return left, k - 1 - left


def _fwd_conv(v, a):
    x, w = v
    k = w.shape[0]
    if x.shape[2] != w.shape[1]:
        raise ShapeMismatch(f"conv1d_same channel mismatch: {x.shape} vs {w.shape}")
    left, right = _conv_pads(k)
    xp = np.pad(x, ((0, 0), (left, right), (0, 0)))
    cols = sliding_window_view(xp, k, axis=1)  # (B, L, C, K)
    b, length, c, _ = cols.shape
    flat = cols.transpose(0, 1, 3, 2).reshape(b * length, k * c)
    out = (flat @ w.reshape(k * c, -1)).reshape(b, length, -1)
    return out, flat


def _bwd_conv(g, v, out, flat, a):
    x, w = v
    k, c, f = w.shape
    b, length, _ = x.shape
    g2 = g.reshape(b * length, f)
    gw = (flat.T @ g2).reshape(k, c, f)
    gcols = (g2 @ w.reshape(k * c, f).T).reshape(b, length, k, c)
    left, right = _conv_pads(k)
    gxp = np.zeros((b, length + k - 1, c))
    for j in range(k):
        gxp[:, j : j + length, :] += gcols[:, :, j, :]
    return [gxp[:, left : left + length, :], gw]


def _fwd_sigmoid(v, a):
    return expit(v[0]), None


def _bwd_sigmoid(g, v, out, cache, a):
    return [g * out * (1.0 - out)]


def _fwd_tanh(v, a):
    return np.tanh(v[0]), None


def _bwd_tanh(g, v, out, cache, a):
    return [g * (1.0 - out * out)]


def _fwd_relu(v, a):
    return np.maximum(v[0], 0.0), None


def _bwd_relu(g, v, out, cache, a):
    return [g * (v[0] > 0)]


def _fwd_exp(v, a):
    return np.exp(v[0]), None


def _bwd_exp(g, v, out, cache, a):
    return [g * out]


def _fwd_log(v, a):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(v[0]), None


def _bwd_log(g, v, out, cache, a):
    return [g / v[0]]


def _fwd_clip(v, a):
    domain = a.get("domain")
    if domain is not None and ((v[0] < domain[0]).any() or (v[0] > domain[1]).any()):
        raise DomainError(f"values outside [{domain[0]}, {domain[1]}] cannot be clamped")
    return np.clip(v[0], a["lo"], a["hi"]), None


def _bwd_clip(g, v, out, cache, a):
    x = v[0]
    return [g * ((x >= a["lo"]) & (x <= a["hi"]))]


def _shape_reduce(s, a):
    return ()


def _fwd_mean(v, a):
    return np.asarray(v[0].mean()), v[0].size


def _bwd_mean(g, v, out, n, a):
    return [np.full(v[0].shape, g / n)]


def _fwd_sum(v, a):
    return np.asarray(v[0].sum()), None


def _bwd_sum(g, v, out, cache, a):
    return [np.full(v[0].shape, float(g))]


def _shape_embedding(s, a):
    table, idx = s
    _require(len(table) == 2, f"embedding table must be 2-D, got {table}")
    return tuple(idx) + (table[1],)


def _fwd_embedding(v, a):
    table, idx = v
    if not np.issubdtype(idx.dtype, np.integer):
        raise ShapeMismatch("embedding indices must be integers")
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise IndexOutOfRange(f"embedding index outside 0..{table.shape[0] - 1}")
    out = table[idx]
    out[idx == a["pad_index"]] = 0.0
    return out, None


def _bwd_embedding(g, v, out, cache, a):
    table, idx = v
    gt = np.zeros_like(table)
    np.add.at(gt, idx.reshape(-1), g.reshape(-1, table.shape[1]))
    gt[a["pad_index"]] = 0.0
    return [gt, None]


@dataclass(frozen=True)
class OpDef:
    shape: Callable
    forward: Callable
    backward: Callable
    kink: Callable | None = None  # input values -> region labels; differing labels = kink crossed


OPS: dict[str, OpDef] = {
    "matmul": OpDef(_shape_matmul, _fwd_matmul, _bwd_matmul),
    "add": OpDef(_shape_same, _fwd_add, _bwd_add),
    "sub": OpDef(_shape_same, _fwd_sub, _bwd_sub),
    "mul": OpDef(_shape_same, _fwd_mul, _bwd_mul),
    "affine": OpDef(_shape_unary, _fwd_affine, _bwd_affine),
    "bias_add": OpDef(_shape_bias_add, _fwd_bias_add, _bwd_bias_add),
    "concat": OpDef(_shape_concat, _fwd_concat, _bwd_concat),
    "slice": OpDef(_shape_slice, _fwd_slice, _bwd_slice),
    "stack": OpDef(_shape_stack, _fwd_stack, _bwd_stack),
    "reshape": OpDef(_shape_reshape, _fwd_reshape, _bwd_reshape),
    "conv1d_same": OpDef(_shape_conv, _fwd_conv, _bwd_conv),
    "sigmoid": OpDef(_shape_unary, _fwd_sigmoid, _bwd_sigmoid),
    "tanh": OpDef(_shape_unary, _fwd_tanh, _bwd_tanh),
    "relu": OpDef(_shape_unary, _fwd_relu, _bwd_relu, kink=lambda x, a: np.sign(x)),
    "exp": OpDef(_shape_unary, _fwd_exp, _bwd_exp),
    "log": OpDef(_shape_unary, _fwd_log, _bwd_log),
    "clip": OpDef(_shape_unary, _fwd_clip, _bwd_clip,
                  kink=lambda x, a: np.where(x < a["lo"], -1, np.where(x > a["hi"], 1, 0))
                  + 3 * ((x == a["lo"]) | (x == a["hi"]))),
    "mean": OpDef(_shape_reduce, _fwd_mean, _bwd_mean),
    "sum": OpDef(_shape_reduce, _fwd_sum, _bwd_sum),
    "embedding": OpDef(_shape_embedding, _fwd_embedding, _bwd_embedding),
}


class ComputeGraph:
    """Nodes are appended in construction order, which is a topological order."""

    def __init__(self):
        self.nodes: list[Node] = []
        self._by_name: dict[str, Node] = {}
        self.params: dict[str, np.ndarray] = {}
        self.values: dict[str, np.ndarray] = {}
        self._caches: dict[str, object] = {}
        self._bindings: dict[str, np.ndarray] | None = None
        self._counter = 0

    # construction -----------------------------------------------------------
    def _name(self, name, op):
        if name is None:
            name = f"{op}_{self._counter}"
            self._counter += 1
        if name in self._by_name:
            raise ValueError(f"duplicate node name {name!r}")
        return name

    def _add(self, op, inputs, attrs, shape, name):
        for node in inputs:
            if node.graph is not self:
                raise ValueError("node belongs to a different graph")
        node = Node(self._name(name, op), op, tuple(inputs), attrs, tuple(shape), len(self.nodes), self)
        self.nodes.append(node)
        self._by_name[node.name] = node
        return node

    def input(self, name: str, shape: Sequence, dtype: str = "float") -> Node:
        return self._add("input", (), {"dtype": dtype}, tuple(shape), name)

    def parameter(self, name: str, value) -> Node:
        value = np.array(value, dtype=np.float64)
        node = self._add("parameter", (), {}, value.shape, name)
        self.params[name] = value
        return node

    def apply(self, op: str, *inputs: Node, name: str | None = None, **attrs) -> Node:
        spec = OPS[op]
        attrs["_op"] = op
        shape = spec.shape([n.shape for n in inputs], attrs)
        return self._add(op, inputs, attrs, shape, name)

    def __getitem__(self, name: str) -> Node:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    @property
    def input_names(self) -> list[str]:
        return [n.name for n in self.nodes if n.op == "input"]

    def parameter_count(self) -> int:
        return sum(int(v.size) for v in self.params.values())

    # op sugar
    def matmul(self, a, b, name=None):
        return self.apply("matmul", a, b, name=name)

    def add(self, a, b, name=None):
        return self.apply("add", a, b, name=name)

    def sub(self, a, b, name=None):
        return self.apply("sub", a, b, name=name)

    def mul(self, a, b, name=None):
        return self.apply("mul", a, b, name=name)

    def affine(self, x, scale=1.0, shift=0.0, name=None):
        return self.apply("affine", x, name=name, scale=float(scale), shift=float(shift))

    def bias_add(self, x, b, name=None):
        return self.apply("bias_add", x, b, name=name)

    def concat(self, nodes, name=None):
        return self.apply("concat", *nodes, name=name)

    def slice(self, x, axis, start, stop, squeeze=False, name=None):
        return self.apply("slice", x, name=name, axis=axis, start=start, stop=stop, squeeze=squeeze)

    def stack(self, nodes, axis=1, name=None):
        return self.apply("stack", *nodes, name=name, axis=axis)

    def reshape(self, x, target, name=None):
        return self.apply("reshape", x, name=name, target=tuple(target))

    def conv1d_same(self, x, w, name=None):
        return self.apply("conv1d_same", x, w, name=name)

    def sigmoid(self, x, name=None):
        return self.apply("sigmoid", x, name=name)

    def tanh(self, x, name=None):
        return self.apply("tanh", x, name=name)

    def relu(self, x, name=None):
        return self.apply("relu", x, name=name)

    def exp(self, x, name=None):
        return self.apply("exp", x, name=name)

    def log(self, x, name=None):
        return self.apply("log", x, name=name)

    def clip(self, x, lo, hi, domain=None, name=None):
        """Clamp to [lo, hi]; values outside ``domain`` (if given) raise DomainError."""
        return self.apply("clip", x, name=name, lo=float(lo), hi=float(hi), domain=domain)

    def mean(self, x, name=None):
        return self.apply("mean", x, name=name)

    def sum(self, x, name=None):
        return self.apply("sum", x, name=name)

    def embedding(self, table, indices, pad_index=0, name=None):
        return self.apply("embedding", table, indices, name=name, pad_index=pad_index)


def _ancestors(graph: ComputeGraph, targets: Sequence[Node]) -> list[Node]:
    # graphs are append-only, so (node count, targets) identifies the answer
    key = (len(graph.nodes), tuple(t.index for t in targets))
    cache = graph.__dict__.setdefault("_ancestor_cache", {})
    if key not in cache:
        cache[key] = _collect_ancestors(graph, targets)
    return cache[key]


def _collect_ancestors(graph: ComputeGraph, targets: Sequence[Node]) -> list[Node]:
    keep = set()
    stack = list(targets)
    while stack:
        n = stack.pop()
        if n.index in keep:
            continue
        keep.add(n.index)
        stack.extend(n.inputs)
    return [n for n in graph.nodes if n.index in keep]


def _resolve(graph, node) -> Node:
    return graph[node] if isinstance(node, str) else node


def forward_eval(
    graph: ComputeGraph,
    bindings: Mapping[str, np.ndarray],
    outputs: Sequence | None = None,
    check_finite: bool = True,
) -> dict[str, np.ndarray]:
    """Evaluate ``graph`` (or just the ancestors of ``outputs``) and memoize node values."""
    if outputs is None:
        order = graph.nodes
    else:
        order = _ancestors(graph, [_resolve(graph, o) for o in outputs])
    values: dict[str, np.ndarray] = {}
    caches: dict[str, object] = {}
    bound: dict[str, np.ndarray] = {}
    for node in order:
        if node.op == "input":
            if node.name not in bindings:
                raise UnboundInput(f"input {node.name!r} is not bound")
            val = np.asarray(bindings[node.name])
            val = val.astype(np.int64) if node.attrs["dtype"] == "int" else val.astype(np.float64)
            if not _shapes_match(node.shape, val.shape):
                raise ShapeMismatch(f"input {node.name!r}: declared {node.shape}, bound {val.shape}")
            bound[node.name] = val
        elif node.op == "parameter":
            val = graph.params[node.name]
        else:
            val, cache = OPS[node.op].forward([values[i.name] for i in node.inputs], node.attrs)
            if not _shapes_match(node.shape, val.shape):
                raise ShapeMismatch(f"node {node.name!r}: declared {node.shape}, evaluated {val.shape}")
            caches[node.name] = cache
        if check_finite and val.dtype.kind == "f" and not np.isfinite(val).all():
            raise NonFiniteValue(node.name)
        values[node.name] = val
    graph.values = values
    graph._caches = caches
    graph._bindings = bound
    return values


def backward_gradients(graph: ComputeGraph, loss) -> dict[str, np.ndarray]:
    loss = _resolve(graph, loss)
    if loss.name not in graph.values:
        raise ForwardNotRun(f"forward_eval has not produced a value for {loss.name!r}")
    if graph.values[loss.name].shape != ():
        raise NotScalarLoss(f"loss node {loss.name!r} has shape {graph.values[loss.name].shape}")
    order = _ancestors(graph, [loss])
    needs: set[int] = set()
    for n in order:
        if n.op == "parameter" or any(i.index in needs for i in n.inputs):
            needs.add(n.index)
    grads: dict[int, np.ndarray] = {loss.index: np.asarray(1.0)}
    owned: set[int] = set()
    for n in reversed(order):
        if n.index not in needs or n.index not in grads or n.kind != "op":
            continue
        g = grads.pop(n.index)
        vals = [graph.values[i.name] for i in n.inputs]
        if n.op == "slice":
            # scatter straight into an owned buffer instead of materializing a zero-padded copy
            inp = n.inputs[0]
            if inp.index in needs:
                buf = grads.get(inp.index)
                if inp.index not in owned:
                    buf = np.zeros(vals[0].shape) if buf is None else np.array(buf, dtype=np.float64)
                    grads[inp.index] = buf
                    owned.add(inp.index)
                buf[_slicer(buf.ndim, n.attrs)] += g
            continue
        in_grads = OPS[n.op].backward(g, vals, graph.values[n.name], graph._caches[n.name], n.attrs)
        for inp, gi in zip(n.inputs, in_grads):
            if gi is None or inp.index not in needs:
                continue
            if inp.index in grads:
                grads[inp.index] = grads[inp.index] + gi
                owned.add(inp.index)
            else:
                grads[inp.index] = gi
                owned.discard(inp.index)
    out = {}
    for name, value in graph.params.items():
        node = graph[name]
        g = grads.get(node.index)
        out[name] = np.zeros_like(value) if g is None else np.asarray(g, dtype=np.float64).reshape(value.shape)
    return out


# --- finite differences ------------------------------------------------------


@dataclass
class GradCheckReport:
    max_relative_error: float
    n_checked: int
    excluded: list[tuple[str, int]]  # (parameter, flat index) skipped at kinks
    worst: tuple[str, int] | None


def _kink_regions(graph: ComputeGraph) -> dict[str, np.ndarray]:
    out = {}
    for n in graph.nodes:
        kink = OPS[n.op].kink if n.kind == "op" else None
        if kink is not None and n.name in graph.values:
            out[n.name] = kink(graph.values[n.inputs[0].name], n.attrs)
    return out


def finite_difference_report(
    graph: ComputeGraph,
    loss,
    epsilon: float = 1e-5,
    bindings: Mapping[str, np.ndarray] | None = None,
    params: Sequence[str] | None = None,
    max_coords: int | None = None,
    seed: int = 0,
) -> GradCheckReport:
    """Compare analytic gradients to central differences, coordinate by coordinate.

    Coordinates whose ±epsilon perturbation moves any relu (or clip) input
    onto or across its kink (including inputs sitting exactly at 0) are
    reported in ``excluded`` and not compared. ``max_coords`` samples that many
    coordinates per parameter instead of checking all of them.
    """
    loss = _resolve(graph, loss)
    if bindings is None:
        if graph._bindings is None:
            raise ForwardNotRun("no bindings given and forward_eval has not been run")
        bindings = graph._bindings
    bindings = dict(bindings)
    forward_eval(graph, bindings, outputs=[loss])
    analytic = backward_gradients(graph, loss)
    base_regions = _kink_regions(graph)
    rng = np.random.default_rng(seed)

    worst_err, worst, n_checked, excluded = 0.0, None, 0, []
    for pname in params or list(graph.params):
        value = graph.params[pname]
        flat = value.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))
        for k in coords:
            orig = flat[k]
            evals, regions = [], []
            for delta in (epsilon, -epsilon):
                flat[k] = orig + delta
                evals.append(float(forward_eval(graph, bindings, outputs=[loss], check_finite=False)[loss.name]))
                regions.append(_kink_regions(graph))
            flat[k] = orig
            crossed = any(
                not np.array_equal(r[name], base_regions[name]) for r in regions for name in base_regions
            )
            if crossed:
                excluded.append((pname, int(k)))
                continue
            numeric = (evals[0] - evals[1]) / (2 * epsilon)
            a = float(analytic[pname].reshape(-1)[k])
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            n_checked += 1
            if worst is None or err > worst_err:
                worst_err, worst = err, (pname, int(k))
    forward_eval(graph, bindings, outputs=[loss])  # leave memoized values at the unperturbed point
    return GradCheckReport(worst_err, n_checked, excluded, worst)


def finite_difference_check(graph: ComputeGraph, loss, epsilon: float = 1e-5, **kwargs) -> float:
    return finite_difference_report(graph, loss, epsilon, **kwargs).max_relative_error
