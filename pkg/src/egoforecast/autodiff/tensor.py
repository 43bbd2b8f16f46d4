"""Tensors and the gradient tape.

A :class:`Tensor` wraps a float64 numpy array.  Operations from
:mod:`egoforecast.autodiff.ops` record themselves on the innermost
active :class:`Tape`; :func:`backward` replays the tape once, in
reverse, accumulating gradients additively where a value fans out into
several consumers.
"""
import numpy as np


class Tensor:
    """A float64 array plus gradient metadata.

    ``requires_grad`` marks tensors whose gradient should be written to
    ``.grad`` by :func:`backward` (typically parameters and probe
    inputs).  Tensors produced by taped ops carry an internal flag
    instead and only act as conduits.
    """

    __slots__ = ("data", "requires_grad", "grad", "_on_graph")

    def __init__(self, data, requires_grad=False):
        arr = np.asarray(data, dtype=np.float64)
        if not arr.flags["C_CONTIGUOUS"]:
            arr = np.ascontiguousarray(arr)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._on_graph = False

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        if self.data.size != 1:
            raise ValueError(
                "item() needs a single-element tensor, got shape %r"
                % (self.data.shape,))
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return "Tensor(shape=%r%s)" % (self.data.shape, flag)


class _TapeEntry:
    __slots__ = ("out", "inputs", "backward")

    def __init__(self, out, inputs, backward):
        self.out = out
        self.inputs = inputs
        self.backward = backward


_TAPE_STACK = []


class Tape:
    """Ordered record of differentiable ops, used as a context manager.

    Entries are appended in execution order, so the list is already a
    topological order of the graph: every entry's inputs were either
    created outside the tape or produced by an earlier entry.
    """

    def __init__(self):
        self._entries = []
        self._pos = {}  # id(out tensor) -> entry index

    def __enter__(self):
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _TAPE_STACK.pop()
        assert popped is self
        return False

    def record(self, out, inputs, backward):
        self._pos[id(out)] = len(self._entries)
        self._entries.append(_TapeEntry(out, tuple(inputs), backward))

    def __len__(self):
        return len(self._entries)

    @property
    def entries(self):
        return self._entries

    def index_of(self, tensor):
        """Entry index that produced ``tensor``, or None if a leaf."""
        return self._pos.get(id(tensor))


def active_tape():
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def backward(tape, loss):
    """Reverse sweep over ``tape`` from scalar ``loss``.

    Visits each recorded node exactly once, in reverse execution order.
    Gradients flowing into the same tensor from several consumers are
    summed.  Tensors with ``requires_grad`` get the result accumulated
    into ``.grad`` (added to any gradient already there).
    """
    if loss.data.size != 1:
        raise ValueError(
            "backward expects a scalar loss, got shape %r" % (loss.shape,))

    grads = {id(loss): np.ones_like(loss.data)}
    leaves = {}
    if loss.requires_grad:
        leaves[id(loss)] = loss

    for entry in reversed(tape._entries):
        g = grads.pop(id(entry.out), None)
        if g is None:
            continue  # node not on the path from loss
        if entry.out.requires_grad:
            out = entry.out
            out.grad = g if out.grad is None else out.grad + g
        input_grads = entry.backward(g)
        for t, ig in zip(entry.inputs, input_grads):
            if ig is None:
                continue
            tid = id(t)
            if tid in grads:
                grads[tid] = grads[tid] + ig
            else:
                grads[tid] = ig
            if t.requires_grad and tid not in tape._pos:
                leaves[tid] = t

    for tid, t in leaves.items():
        g = grads.get(tid)
        if g is None:
            continue
        t.grad = g if t.grad is None else t.grad + g
