"""Adam optimizer with bias-corrected moment estimates."""
import numpy as np

from .. import kernels


class NonFiniteGradient(FloatingPointError):
    """A parameter gradient contained NaN or infinity; the step was not taken."""


class AdamState:
    """Optimizer state: one (m, v) moment pair per parameter plus a step count.

    ``step`` consumes ``.grad`` of each named parameter tensor.  If any
    gradient is non-finite the whole step is rejected: no parameter, no
    moment, and no step count changes.
    """

    def __init__(self, named_params, lr=5e-5, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = {}
        self.v = {}
        for name, p in named_params:
            self.m[name] = np.zeros(p.data.size)
            self.v[name] = np.zeros(p.data.size)

    def step(self, named_params):
        items = [(name, p) for name, p in named_params if p.grad is not None]
        for name, p in items:
            if not np.all(np.isfinite(p.grad)):
                raise NonFiniteGradient(
                    "non-finite gradient for parameter %r; step rejected" % name)
        self.t += 1
        for name, p in items:
            kernels.adam_update(
                p.data.reshape(-1), p.grad.reshape(-1),
                self.m[name], self.v[name],
                self.t, self.lr, self.beta1, self.beta2, self.eps)
