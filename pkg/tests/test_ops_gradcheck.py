"""Finite-difference oracles for every backward rule, plus exact cases."""
import numpy as np
import pytest

from egoforecast.autodiff import Tensor, Tape, backward, ops
from egoforecast.autodiff.checksuite import standard_suite
from egoforecast.autodiff.gradcheck import gradcheck, random_inputs


def test_every_op_matches_finite_differences():
    for case in standard_suite():
        assert case.max_err <= case.tol, (
            "%s: %.3e > %.0e" % (case.name, case.max_err, case.tol))


def test_matmul_sum_gradient_tight_tolerance():
    # gradient of sum(A@B) wrt A is a rank-one pattern; checked to 1e-6
    inputs = random_inputs({"a": (4, 3), "b": (3, 5)}, seed=7)
    err, _ = gradcheck(
        lambda v: ops.sum_all(ops.matmul(v["a"], v["b"])), inputs, h=1e-6)
    assert err <= 1e-6


def test_mse_gradient_closed_form():
    # d/dpred mean((pred-target)^2) = 2(pred-target)/count
    rng = np.random.default_rng(3)
    p = Tensor(rng.standard_normal((4, 6)), requires_grad=True)
    t = Tensor(rng.standard_normal((4, 6)), requires_grad=True)
    with Tape() as tape:
        loss = ops.mse_loss(p, t)
    backward(tape, loss)
    expect = 2.0 * (p.data - t.data) / p.data.size
    np.testing.assert_allclose(p.grad, expect, rtol=0, atol=1e-15)
    np.testing.assert_allclose(t.grad, -expect, rtol=0, atol=1e-15)


def test_quadratic_loss_fd_is_exact():
    inputs = random_inputs({"p": (5,)}, seed=1)
    err, _ = gradcheck(lambda v: ops.sum_all(ops.mul(v["p"], v["p"])),
                       inputs, h=1e-6)
    assert err <= 1e-8


def test_softmax_rows_sum_to_one_and_shift_invariant():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((6, 9))
    y = ops.softmax_rows(Tensor(x)).data
    np.testing.assert_allclose(y.sum(axis=-1), 1.0, rtol=0, atol=1e-12)
    shifted = ops.softmax_rows(Tensor(x + 123.456)).data
    np.testing.assert_allclose(shifted, y, rtol=0, atol=1e-12)


def test_layer_norm_statistics():
    rng = np.random.default_rng(6)
    x = Tensor(rng.standard_normal((4, 16)) * 3 + 2)
    y = ops.layer_norm(x, Tensor(np.ones(16)), Tensor(np.zeros(16))).data
    np.testing.assert_allclose(y.mean(axis=-1), 0.0, atol=1e-12)
    np.testing.assert_allclose(y.var(axis=-1), 1.0, atol=1e-4)


def test_broadcast_add_gradient_sums_over_broadcast_axes():
    x = Tensor(np.zeros((3, 4)), requires_grad=True)
    b = Tensor(np.zeros(4), requires_grad=True)
    with Tape() as tape:
        loss = ops.sum_all(ops.add(x, b))
    backward(tape, loss)
    np.testing.assert_array_equal(b.grad, np.full(4, 3.0))
    np.testing.assert_array_equal(x.grad, np.ones((3, 4)))


def test_shape_errors():
    a = Tensor(np.zeros((2, 3)))
    b = Tensor(np.zeros((4, 5)))
    with pytest.raises(ops.ShapeError):
        ops.matmul(a, b)
    with pytest.raises(ops.ShapeError):
        ops.concat([Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 3)))], 1)
    with pytest.raises(ops.ShapeError):
        ops.linear(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 5))), None)


def test_gradcheck_rejects_bad_step_size():
    inputs = random_inputs({"x": (2,)}, seed=0)
    with pytest.raises(ValueError):
        gradcheck(lambda v: ops.sum_all(v["x"]), inputs, h=1e-2)


def test_mutated_backward_rule_is_detected():
    # corrupt one backward rule; the checker must flag it loudly
    ops.set_backward_fault("softmax_rows", 2.0)
    try:
        inputs = random_inputs({"x": (3, 6), "y": (3, 6)}, seed=9)
        err, _ = gradcheck(
            lambda v: ops.sum_all(ops.mul(ops.softmax_rows(v["x"]), v["y"])),
            inputs, h=1e-6)
    finally:
        ops.clear_backward_faults()
    assert err > 1e-2

    # and with the fault cleared the same check passes again
    inputs = random_inputs({"x": (3, 6), "y": (3, 6)}, seed=9)
    err, _ = gradcheck(
        lambda v: ops.sum_all(ops.mul(ops.softmax_rows(v["x"]), v["y"])),
        inputs, h=1e-6)
    assert err <= 1e-5
