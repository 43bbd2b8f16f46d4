"""Finite-difference verification of taped gradients.

``gradcheck`` compares the analytic gradient of a scalar-valued
function against central differences, element by element, and reports
the worst relative error.  The probe step must sit in [1e-7, 1e-4];
outside that band float64 cancellation (below) or truncation error
(above) drowns the signal.
"""
import numpy as np

from .tensor import Tensor, Tape, backward


def _rel_err(a, n):
    return abs(a - n) / max(abs(a), abs(n), 1e-8)


def gradcheck(fn, inputs, h=1e-6):
    """Max relative error between taped and finite-difference gradients.

    fn: callable taking ``inputs`` (dict name -> Tensor, all marked
    requires_grad) and returning a scalar Tensor.  Every call must
    rebuild its graph from the current tensor values.  Returns
    ``(max_err, per_input)`` where per_input maps name -> worst error
    for that tensor.
    """
    if not 1e-7 <= h <= 1e-4:
        raise ValueError("perturbation h=%g outside [1e-7, 1e-4]" % h)

    for t in inputs.values():
        t.zero_grad()
    with Tape() as tape:
        loss = fn(inputs)
    if loss.size != 1:
        raise ValueError("gradcheck needs a scalar-valued fn")
    backward(tape, loss)

    analytic = {}
    for name, t in inputs.items():
        g = t.grad if t.grad is not None else np.zeros_like(t.data)
        analytic[name] = np.array(g, copy=True)

    def eval_loss():
        return fn(inputs).item()

    per_input = {}
    for name, t in inputs.items():
        flat = t.data.reshape(-1)
        aflat = analytic[name].reshape(-1)
        worst = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = eval_loss()
            flat[i] = orig - h
            fm = eval_loss()
            flat[i] = orig
            num = (fp - fm) / (2.0 * h)
            worst = max(worst, _rel_err(aflat[i], num))
        per_input[name] = worst

    return max(per_input.values()), per_input


def random_inputs(shapes, seed):
    """Gaussian probe tensors, all requiring grad: {name: shape} -> dict."""
    rng = np.random.default_rng(seed)
    return {
        name: Tensor(rng.standard_normal(shape), requires_grad=True)
        for name, shape in shapes.items()
    }
