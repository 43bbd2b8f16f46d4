"""Optimizer behavior against closed-form single-step and convergence oracles."""
import numpy as np
import pytest

from egoforecast.autodiff import (AdamState, NonFiniteGradient, Tensor, Tape,
                                  backward, ops)


def _named(w):
    return [("w", w)]


def test_zero_gradient_leaves_parameters_unchanged():
    w = Tensor([1.0, -2.0, 3.0], requires_grad=True)
    w.grad = np.zeros(3)
    before = w.data.copy()
    AdamState(_named(w), lr=0.1).step(_named(w))
    np.testing.assert_array_equal(w.data, before)


def test_first_step_magnitude_is_lr_times_sign():
    # with bias correction, step 1 moves by lr*g/(|g|+eps) ~= lr*sign(g)
    w = Tensor([0.5, -0.5, 2.0], requires_grad=True)
    g = np.array([0.3, -0.01, 4.0])
    w.grad = g.copy()
    before = w.data.copy()
    AdamState(_named(w), lr=1e-2).step(_named(w))
    update = w.data - before
    np.testing.assert_allclose(update, -1e-2 * np.sign(g), rtol=1e-6)


def test_converges_on_scalar_quadratic():
    # 200 steps on (w-3)^2 from w=0 at lr 0.1 lands within 0.1 of the minimum
    w = Tensor([0.0], requires_grad=True)
    opt = AdamState(_named(w), lr=0.1)
    for _ in range(200):
        w.zero_grad()
        with Tape() as tape:
            diff = ops.sub(w, Tensor([3.0]))
            loss = ops.sum_all(ops.mul(diff, diff))
        backward(tape, loss)
        opt.step(_named(w))
    assert abs(w.data[0] - 3.0) < 0.1


def test_nonfinite_gradient_rejects_whole_step():
    w1 = Tensor([1.0], requires_grad=True)
    w2 = Tensor([2.0], requires_grad=True)
    named = [("a", w1), ("b", w2)]
    opt = AdamState(named, lr=0.1)
    w1.grad = np.array([0.5])
    w2.grad = np.array([np.nan])
    with pytest.raises(NonFiniteGradient):
        opt.step(named)
    # nothing moved: parameters, moments, step count
    assert w1.data[0] == 1.0 and w2.data[0] == 2.0
    assert opt.t == 0
    assert not opt.m["a"].any() and not opt.v["a"].any()


def test_moments_update_even_at_zero_lr():
    w = Tensor([1.0], requires_grad=True)
    opt = AdamState(_named(w), lr=0.0)
    w.grad = np.array([2.0])
    opt.step(_named(w))
    assert w.data[0] == 1.0          # bit-identical parameter
    assert opt.t == 1 and opt.m["w"][0] != 0.0
