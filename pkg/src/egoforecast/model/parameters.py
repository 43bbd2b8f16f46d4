"""Named, ordered parameter storage shared by all model kinds."""
import numpy as np

from ..autodiff import Tensor


class ParamStore:
    """Insertion-ordered mapping of parameter name -> Tensor.

    The order is the serialization order of checkpoints, so builders
    must create parameters deterministically.
    """

    def __init__(self):
        self._params = {}

    def add(self, name, array):
        if name in self._params:
            raise ValueError("duplicate parameter name %r" % name)
        t = Tensor(np.asarray(array, dtype=np.float64), requires_grad=True)
        self._params[name] = t
        return t

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return list(self._params.items())

    def tensors(self):
        return list(self._params.values())

    def zero_grad(self):
        for t in self._params.values():
            t.grad = None

    def count_values(self):
        return sum(t.size for t in self._params.values())


def uniform_init(rng, shape, fan_in):
    """Uniform(+-sqrt(1/fan_in)) weight draw."""
    bound = float(np.sqrt(1.0 / fan_in))
    return rng.uniform(-bound, bound, size=shape)
