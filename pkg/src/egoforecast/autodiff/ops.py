"""Differentiable operations over :class:`~egoforecast.autodiff.tensor.Tensor`.

Each op computes its forward value eagerly (through the kernel layer
where one exists) and, when a tape is active and some input
participates in the graph, records a backward closure.  Backward
closures return one gradient array per input, ``None`` for inputs that
get no gradient.
"""
import numpy as np

from .. import kernels
from .tensor import Tensor, active_tape


class ShapeError(ValueError):
    """Operand shapes incompatible with the requested op."""


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _wants(*tensors):
    return any(t.requires_grad or t._on_graph for t in tensors)


# Test hook: scale an op's backward outputs to model a broken gradient.
# Keyed by op name; used to prove the finite-difference checker catches
# faults.  Empty in normal operation.
_BACKWARD_FAULTS = {}


def set_backward_fault(op_name, scale=None):
    if scale is None or scale == 1.0:
        _BACKWARD_FAULTS.pop(op_name, None)
    else:
        _BACKWARD_FAULTS[op_name] = float(scale)


def clear_backward_faults():
    _BACKWARD_FAULTS.clear()


def _record(tape, op_name, out, inputs, bwd):
    fault = _BACKWARD_FAULTS.get(op_name)
    if fault is not None:
        inner = bwd

        def bwd(dy, _inner=inner, _s=fault):
            return tuple(None if g is None else g * _s for g in _inner(dy))

    out._on_graph = True
    tape.record(out, inputs, bwd)


def _unbroadcast(g, shape):
    """Sum ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = Tensor(a.data + b.data)
    except ValueError:
        raise ShapeError(
            "add: shapes %r and %r do not broadcast" % (a.shape, b.shape))
    tape = active_tape()
    if tape is not None and _wants(a, b):
        ash, bsh = a.data.shape, b.data.shape

        def bwd(dy):
            return _unbroadcast(dy, ash), _unbroadcast(dy, bsh)

        _record(tape, "add", out, (a, b), bwd)
    return out


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = Tensor(a.data - b.data)
    except ValueError:
        raise ShapeError(
            "sub: shapes %r and %r do not broadcast" % (a.shape, b.shape))
    tape = active_tape()
    if tape is not None and _wants(a, b):
        ash, bsh = a.data.shape, b.data.shape

        def bwd(dy):
            return _unbroadcast(dy, ash), _unbroadcast(-dy, bsh)

        _record(tape, "sub", out, (a, b), bwd)
    return out


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = Tensor(a.data * b.data)
    except ValueError:
        raise ShapeError(
            "mul: shapes %r and %r do not broadcast" % (a.shape, b.shape))
    tape = active_tape()
    if tape is not None and _wants(a, b):
        ad, bd = a.data, b.data

        def bwd(dy):
            return (_unbroadcast(dy * bd, ad.shape),
                    _unbroadcast(dy * ad, bd.shape))

        _record(tape, "mul", out, (a, b), bwd)
    return out


def scale(a, s):
    a = _as_tensor(a)
    s = float(s)
    out = Tensor(a.data * s)
    tape = active_tape()
    if tape is not None and _wants(a):

        def bwd(dy):
            return (dy * s,)

        _record(tape, "scale", out, (a,), bwd)
    return out


def neg(a):
    return scale(a, -1.0)


def matmul(a, b):
    """Matrix product.

    Supported operand ranks: 2D @ 2D; equal-rank batched (leading axes
    must match exactly); ND @ 2D, which maps the last axis through a
    weight matrix.
    """
    a, b = _as_tensor(a), _as_tensor(b)
    ad, bd = a.data, b.data
    if ad.ndim < 2 or bd.ndim < 2:
        raise ShapeError(
            "matmul needs operands of rank >= 2, got %r and %r"
            % (a.shape, b.shape))
    if ad.shape[-1] != bd.shape[-2]:
        raise ShapeError(
            "matmul: inner dimensions disagree, %r @ %r" % (a.shape, b.shape))

    if ad.ndim == bd.ndim:
        if ad.ndim > 2 and ad.shape[:-2] != bd.shape[:-2]:
            raise ShapeError(
                "matmul: batch dimensions disagree, %r @ %r"
                % (a.shape, b.shape))
        out = Tensor(np.matmul(ad, bd))
        tape = active_tape()
        if tape is not None and _wants(a, b):

            def bwd(dy):
                da = np.matmul(dy, np.swapaxes(bd, -1, -2))
                db = np.matmul(np.swapaxes(ad, -1, -2), dy)
                return da, db

            _record(tape, "matmul", out, (a, b), bwd)
        return out

    if bd.ndim == 2:
        out = Tensor(np.matmul(ad, bd))
        tape = active_tape()
        if tape is not None and _wants(a, b):
            k, n = bd.shape

            def bwd(dy):
                da = np.matmul(dy, bd.T)
                db = ad.reshape(-1, k).T @ dy.reshape(-1, n)
                return da, db

            _record(tape, "matmul", out, (a, b), bwd)
        return out

    raise ShapeError(
        "matmul: unsupported rank combination %r @ %r" % (a.shape, b.shape))


def transpose(a, axes=None):
    """Permute axes; default swaps the last two."""
    a = _as_tensor(a)
    if axes is None:
        if a.ndim < 2:
            raise ShapeError("transpose of rank-%d tensor needs axes" % a.ndim)
        axes = tuple(range(a.ndim - 2)) + (a.ndim - 1, a.ndim - 2)
    axes = tuple(int(x) for x in axes)
    if sorted(axes) != list(range(a.ndim)):
        raise ShapeError(
            "transpose: axes %r is not a permutation for shape %r"
            % (axes, a.shape))
    out = Tensor(np.ascontiguousarray(np.transpose(a.data, axes)))
    tape = active_tape()
    if tape is not None and _wants(a):
        inv = tuple(np.argsort(axes))

        def bwd(dy):
            return (np.ascontiguousarray(np.transpose(dy, inv)),)

        _record(tape, "transpose", out, (a,), bwd)
    return out


def reshape(a, shape):
    a = _as_tensor(a)
    shape = tuple(int(s) for s in shape)
    try:
        out_data = a.data.reshape(shape)
    except ValueError:
        raise ShapeError(
            "reshape: cannot view %r as %r" % (a.shape, shape))
    out = Tensor(out_data.copy())
    tape = active_tape()
    if tape is not None and _wants(a):
        orig = a.data.shape

        def bwd(dy):
            return (dy.reshape(orig),)

        _record(tape, "reshape", out, (a,), bwd)
    return out


def concat(tensors, axis=0):
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat of an empty sequence")
    try:
        out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    except ValueError:
        raise ShapeError(
            "concat along axis %d: incompatible shapes %r"
            % (axis, [t.shape for t in tensors]))
    tape = active_tape()
    if tape is not None and _wants(*tensors):
        sizes = [t.data.shape[axis] for t in tensors]
        splits = np.cumsum(sizes)[:-1]

        def bwd(dy):
            parts = np.split(dy, splits, axis=axis)
            return tuple(np.ascontiguousarray(p) for p in parts)

        _record(tape, "concat", out, tuple(tensors), bwd)
    return out


def narrow(a, axis, start, length):
    """Contiguous slice [start, start+length) along ``axis``."""
    a = _as_tensor(a)
    axis = int(axis)
    if not 0 <= axis < a.ndim:
        raise ShapeError("narrow: axis %d out of range for %r" % (axis, a.shape))
    n = a.data.shape[axis]
    if start < 0 or length < 1 or start + length > n:
        raise ShapeError(
            "narrow: window [%d, %d) invalid for axis of length %d"
            % (start, start + length, n))
    idx = [slice(None)] * a.ndim
    idx[axis] = slice(start, start + length)
    idx = tuple(idx)
    out = Tensor(np.ascontiguousarray(a.data[idx]))
    tape = active_tape()
    if tape is not None and _wants(a):
        shape = a.data.shape

        def bwd(dy):
            g = np.zeros(shape)
            g[idx] = dy
            return (g,)

        _record(tape, "narrow", out, (a,), bwd)
    return out


def relu(x):
    x = _as_tensor(x)
    out = Tensor(kernels.relu_fwd(x.data))
    tape = active_tape()
    if tape is not None and _wants(x):
        xd = x.data

        def bwd(dy):
            return (kernels.relu_bwd(xd, dy),)

        _record(tape, "relu", out, (x,), bwd)
    return out


def sigmoid(x):
    x = _as_tensor(x)
    out = Tensor(kernels.sigmoid_fwd(x.data))
    tape = active_tape()
    if tape is not None and _wants(x):
        yd = out.data

        def bwd(dy):
            return (kernels.sigmoid_bwd(yd, dy),)

        _record(tape, "sigmoid", out, (x,), bwd)
    return out


def tanh(x):
    x = _as_tensor(x)
    out = Tensor(kernels.tanh_fwd(x.data))
    tape = active_tape()
    if tape is not None and _wants(x):
        yd = out.data

        def bwd(dy):
            return (kernels.tanh_bwd(yd, dy),)

        _record(tape, "tanh", out, (x,), bwd)
    return out


def softmax_rows(x):
    """Softmax over the last axis, shift-stabilized by the row max."""
    x = _as_tensor(x)
    if x.ndim < 1:
        raise ShapeError("softmax_rows needs at least rank 1")
    d = x.data.shape[-1]
    x2 = x.data.reshape(-1, d)
    y2 = kernels.softmax_lastdim(x2)
    out = Tensor(y2.reshape(x.data.shape))
    tape = active_tape()
    if tape is not None and _wants(x):
        shape = x.data.shape

        def bwd(dy):
            dx2 = kernels.softmax_lastdim_bwd(y2, dy.reshape(-1, d))
            return (dx2.reshape(shape),)

        _record(tape, "softmax_rows", out, (x,), bwd)
    return out


def layer_norm(x, gain, bias, eps=1e-5):
    """Normalize the last axis to zero mean, unit variance, then affine."""
    x, gain, bias = _as_tensor(x), _as_tensor(gain), _as_tensor(bias)
    d = x.data.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(
            "layer_norm over width %d needs gain/bias of shape (%d,), got "
            "%r and %r" % (d, d, gain.shape, bias.shape))
    x2 = x.data.reshape(-1, d)
    y2, xhat, rstd = kernels.layer_norm_fwd(x2, gain.data, bias.data, eps)
    out = Tensor(y2.reshape(x.data.shape))
    tape = active_tape()
    if tape is not None and _wants(x, gain, bias):
        shape = x.data.shape
        gd = gain.data

        def bwd(dy):
            dx2, dgain, dbias = kernels.layer_norm_bwd(
                xhat, rstd, gd, dy.reshape(-1, d))
            return dx2.reshape(shape), dgain, dbias

        _record(tape, "layer_norm", out, (x, gain, bias), bwd)
    return out


def linear(x, w, b=None):
    """Affine map of the last axis: x @ w + b."""
    x, w = _as_tensor(x), _as_tensor(w)
    if w.ndim != 2:
        raise ShapeError("linear: weight must be 2D, got %r" % (w.shape,))
    if x.data.shape[-1] != w.shape[0]:
        raise ShapeError(
            "linear: input width %d does not match weight %r"
            % (x.data.shape[-1], w.shape))
    out = matmul(x, w)
    if b is not None:
        b = _as_tensor(b)
        if b.shape != (w.shape[1],):
            raise ShapeError(
                "linear: bias shape %r does not match output width %d"
                % (b.shape, w.shape[1]))
        out = add(out, b)
    return out


def sum_all(x):
    x = _as_tensor(x)
    out = Tensor(np.sum(x.data))
    tape = active_tape()
    if tape is not None and _wants(x):
        shape = x.data.shape

        def bwd(dy):
            return (np.broadcast_to(dy, shape).copy(),)

        _record(tape, "sum_all", out, (x,), bwd)
    return out


def mean_all(x):
    x = _as_tensor(x)
    out = Tensor(np.mean(x.data))
    tape = active_tape()
    if tape is not None and _wants(x):
        shape = x.data.shape
        n = x.data.size

        def bwd(dy):
            return (np.broadcast_to(dy / n, shape).copy(),)

        _record(tape, "mean_all", out, (x,), bwd)
    return out


def mse_loss(pred, target):
    """Mean squared error over every element, uniformly weighted."""
    pred, target = _as_tensor(pred), _as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError(
            "mse_loss: prediction %r vs target %r" % (pred.shape, target.shape))
    diff = pred.data - target.data
    out = Tensor(np.mean(diff * diff))
    tape = active_tape()
    if tape is not None and _wants(pred, target):
        n = diff.size

        def bwd(dy):
            g = (2.0 / n) * diff * dy
            return g, -g

        _record(tape, "mse_loss", out, (pred, target), bwd)
    return out
