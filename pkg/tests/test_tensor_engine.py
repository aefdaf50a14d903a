import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chemixnet.errors import ForwardNotRun, NonFiniteValue, NotScalarLoss, ShapeMismatch, UnboundInput
from chemixnet.tensor_engine import (
    ComputeGraph,
    backward_gradients,
    finite_difference_check,
    finite_difference_report,
    forward_eval,
)


def test_matmul_example():
    g = ComputeGraph()
    a = g.input("a", (2, 2))
    b = g.input("b", (2, 1))
    out = g.matmul(a, b)
    vals = forward_eval(g, {"a": [[1, 2], [3, 4]], "b": [[1], [1]]})
    assert vals[out.name].tolist() == [[3], [7]]


def test_relu_example():
    g = ComputeGraph()
    x = g.input("x", (3,))
    r = g.relu(x)
    assert forward_eval(g, {"x": [-1.0, 0.0, 2.0]})[r.name].tolist() == [0, 0, 2]


def test_concat_width_adds():
    g = ComputeGraph()
    a = g.input("a", (None, 64))
    b = g.input("b", (None, 32))
    c = g.concat([a, b])
    assert c.shape == (None, 96)
    vals = forward_eval(g, {"a": np.zeros((5, 64)), "b": np.ones((5, 32))})
    assert vals[c.name].shape == (5, 96)


def test_mean_square_gradient():
    g = ComputeGraph()
    x = g.parameter("x", [1.0, 2.0, 3.0])
    loss = g.mean(g.mul(x, x))
    forward_eval(g, {})
    np.testing.assert_allclose(backward_gradients(g, loss)["x"], [2 / 3, 4 / 3, 2])


def test_disconnected_parameter_gets_zeros():
    g = ComputeGraph()
    x = g.parameter("x", [1.0, 2.0])
    g.parameter("p", np.ones((2, 3)))
    loss = g.sum(x)
    forward_eval(g, {})
    grads = backward_gradients(g, loss)
    assert grads["p"].shape == (2, 3) and not grads["p"].any()


def _two_layer(seed, batch=5):
    rng = np.random.default_rng(seed)
    g = ComputeGraph()
    x = g.input("x", (None, 4))
    w1 = g.parameter("w1", rng.normal(size=(4, 6)))
    b1 = g.parameter("b1", rng.normal(size=6))
    w2 = g.parameter("w2", rng.normal(size=(6, 1)))
    h = g.tanh(g.bias_add(g.matmul(x, w1), b1))
    y = g.input("y", (None, 1))
    d = g.sub(g.matmul(h, w2), y)
    loss = g.mean(g.mul(d, d))
    bind = {"x": rng.normal(size=(batch, 4)), "y": rng.normal(size=(batch, 1))}
    return g, loss, bind


def test_two_layer_network_seed_7():
    g, loss, bind = _two_layer(7)
    forward_eval(g, bind)
    assert finite_difference_check(g, loss, 1e-5) < 1e-4


def test_linear_model_is_exact():
    g = ComputeGraph()
    x = g.input("x", (3, 2))
    w = g.parameter("w", [[0.3], [-1.2]])
    loss = g.sum(g.matmul(x, w))
    forward_eval(g, {"x": np.arange(6.0).reshape(3, 2)})
    assert finite_difference_check(g, loss, 1e-5) < 1e-9


def test_sigmoid_chain_at_zero():
    g = ComputeGraph()
    w = g.parameter("w", np.zeros((1, 1)))
    x = g.input("x", (1, 1))
    loss = g.sum(g.sigmoid(g.sigmoid(g.matmul(x, w))))
    forward_eval(g, {"x": [[0.7]]})
    assert finite_difference_check(g, loss, 1e-5) < 1e-6


def test_relu_kink_coordinate_is_excluded():
    g = ComputeGraph()
    w = g.parameter("w", [[0.0], [1.0]])
    x = g.input("x", (1, 2))
    loss = g.sum(g.relu(g.matmul(x, w)))
    # x = [1, 0]: the relu input equals w[0] + 0*w[1] = 0 exactly
    rep = finite_difference_report(g, loss, 1e-5, bindings={"x": [[1.0, 0.0]]})
    assert ("w", 0) in rep.excluded


@pytest.mark.parametrize("build", ["conv", "embed", "log_exp", "stack_slice", "clip", "reshape"])
def test_op_gradients(build):
    rng = np.random.default_rng(3)
    g = ComputeGraph()
    bind = {}
    if build == "conv":
        x = g.input("x", (None, 7, 3))
        k = g.parameter("k", rng.normal(size=(4, 3, 2)))  # even kernel: extra pad on the right
        out = g.conv1d_same(x, k)
        bind["x"] = rng.normal(size=(2, 7, 3))
    elif build == "embed":
        t = g.parameter("t", rng.normal(size=(5, 3)))
        idx = g.input("i", (None, 4), dtype="int")
        out = g.tanh(g.embedding(t, idx))
        bind["i"] = np.array([[1, 2, 0, 0], [4, 4, 3, 0]])
    elif build == "log_exp":
        p = g.parameter("p", rng.uniform(0.5, 2.0, size=(3, 2)))
        out = g.add(g.log(p), g.exp(g.affine(p, 0.5, -1.0)))
    elif build == "stack_slice":
        p = g.parameter("p", rng.normal(size=(2, 6)))
        parts = [g.slice(p, 1, 0, 3), g.slice(p, 1, 3, 6)]
        out = g.sigmoid(g.stack(parts, axis=1))
    elif build == "clip":
        p = g.parameter("p", np.array([0.2, 0.5, 0.9]))
        out = g.log(g.clip(p, 0.1, 0.95))
    else:
        p = g.parameter("p", rng.normal(size=(2, 6)))
        out = g.tanh(g.reshape(p, (-1, 3, 2)))
    q = g.parameter("q", rng.normal(size=out.shape[1:] if out.shape and out.shape[0] is None else out.shape))
    loss = g.mean(g.mul(out, q) if out.shape[0] is not None else g.mul(g.tanh(out), g.tanh(out)))
    forward_eval(g, bind)
    assert finite_difference_check(g, loss, 1e-5) < 1e-4


def test_conv_same_keeps_length_and_delta_kernel_is_identity():
    g = ComputeGraph()
    x = g.input("x", (None, 5, 1))
    k = g.parameter("k", np.array([0.0, 1.0, 0.0]).reshape(3, 1, 1))
    y = g.conv1d_same(x, k)
    data = np.arange(10.0).reshape(2, 5, 1)
    np.testing.assert_array_equal(forward_eval(g, {"x": data})[y.name], data)


def test_errors():
    g = ComputeGraph()
    x = g.input("x", (None, 3))
    w = g.parameter("w", np.ones((4, 2)))
    with pytest.raises(ShapeMismatch):
        g.matmul(x, w)
    v = g.sum(x)
    with pytest.raises(UnboundInput):
        forward_eval(g, {})
    with pytest.raises(ShapeMismatch):
        forward_eval(g, {"x": np.ones((2, 4))})
    with pytest.raises(ForwardNotRun):
        backward_gradients(g, v)
    forward_eval(g, {"x": np.ones((2, 3))})
    with pytest.raises(NotScalarLoss):
        backward_gradients(g, x)


def test_non_finite_value_names_the_node():
    g = ComputeGraph()
    x = g.input("x", (2,))
    g.exp(x, name="blowup")
    with pytest.raises(NonFiniteValue) as info:
        forward_eval(g, {"x": [1.0, 1e4]})
    assert info.value.node_name == "blowup"


def test_backward_is_linear_in_the_loss():
    g, loss1, bind = _two_layer(11)
    w1 = g["w1"]
    loss2 = g.mean(g.mul(w1, w1))
    total = g.add(loss1, loss2)
    forward_eval(g, bind)
    summed = backward_gradients(g, total)
    g1 = backward_gradients(g, loss1)
    g2 = backward_gradients(g, loss2)
    for name in summed:
        np.testing.assert_allclose(summed[name], g1[name] + g2[name], rtol=1e-12, atol=1e-14)


def test_determinism():
    g, loss, bind = _two_layer(5)
    a = forward_eval(g, bind)[loss.name]
    ga = backward_gradients(g, loss)
    b = forward_eval(g, bind)[loss.name]
    gb = backward_gradients(g, loss)
    assert a.tobytes() == b.tobytes()
    assert all(ga[k].tobytes() == gb[k].tobytes() for k in ga)


dims = st.integers(1, 5)


@given(dims, dims, dims, dims, st.sampled_from(["matmul", "concat", "conv", "slice", "reshape", "stack", "unary"]))
def test_shape_rules_match_evaluation(b, n, m, k, op):
    rng = np.random.default_rng(0)
    g = ComputeGraph()
    if op == "matmul":
        x, bind = g.input("x", (None, n)), {"x": rng.normal(size=(b, n))}
        out = g.matmul(x, g.parameter("w", rng.normal(size=(n, m))))
    elif op == "concat":
        x, y = g.input("x", (None, n)), g.input("y", (None, m))
        bind = {"x": rng.normal(size=(b, n)), "y": rng.normal(size=(b, m))}
        out = g.concat([x, y])
    elif op == "conv":
        x, bind = g.input("x", (None, n, m)), {"x": rng.normal(size=(b, n, m))}
        out = g.conv1d_same(x, g.parameter("w", rng.normal(size=(k, m, 2))))
    elif op == "slice":
        x, bind = g.input("x", (None, n + 1, m)), {"x": rng.normal(size=(b, n + 1, m))}
        out = g.slice(x, 1, 1, n + 1)
    elif op == "reshape":
        x, bind = g.input("x", (None, n, m)), {"x": rng.normal(size=(b, n, m))}
        out = g.reshape(x, (-1, n * m))
    elif op == "stack":
        x, y = g.input("x", (None, n)), g.input("y", (None, n))
        bind = {"x": rng.normal(size=(b, n)), "y": rng.normal(size=(b, n))}
        out = g.stack([x, y], axis=1)
    else:
        x, bind = g.input("x", (None, n)), {"x": rng.normal(size=(b, n))}
        out = g.tanh(g.sigmoid(x))
    val = forward_eval(g, bind)[out.name]
    assert len(val.shape) == len(out.shape)
    assert all(d is None or d == v for d, v in zip(out.shape, val.shape))
