"""Numeric kernel dispatch.

Two interchangeable backends: a compiled Cython extension and a pure
numpy fallback.  The compiled one is used when importable; set
``EGOFORECAST_KERNELS=py`` or ``=c`` to force a choice, or call
:func:`set_backend` at runtime.  Within one build of the extension the
two backends agree to float64 round-off; results across different
compilers are not guaranteed bit-identical.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_forced = os.environ.get("EGOFORECAST_KERNELS", "").strip().lower()
if _forced in ("py", "python", "numpy"):
    _active = _pykernels
elif _forced in ("c", "ext", "cython", "compiled"):
    if _ckernels is None:
        raise ImportError(
            "EGOFORECAST_KERNELS=%r requested the compiled kernels but the "
            "extension is not built; install with the C toolchain or unset "
            "the variable" % _forced
        )
    _active = _ckernels
elif _forced:
    raise ValueError(
        "unknown EGOFORECAST_KERNELS value %r (use 'py' or 'c')" % _forced
    )
else:
    _active = _ckernels if _ckernels is not None else _pykernels


def backend_name():
    return "cython" if _active is _ckernels else "numpy"


def compiled_available():
    return _ckernels is not None


def set_backend(name):
    """Switch kernel backend at runtime ('py'/'numpy' or 'c'/'cython')."""
    global _active
    name = name.strip().lower()
    if name in ("py", "python", "numpy"):
        _active = _pykernels
    elif name in ("c", "ext", "cython", "compiled"):
        if _ckernels is None:
            raise ValueError("compiled kernel backend is not available")
        _active = _ckernels
    else:
        raise ValueError("unknown kernel backend %r (use 'py' or 'c')" % name)


def softmax_lastdim(x):
    return _active.softmax_lastdim(x)


def softmax_lastdim_bwd(y, dy):
    return _active.softmax_lastdim_bwd(y, dy)


def layer_norm_fwd(x, gain, bias, eps):
    return _active.layer_norm_fwd(x, gain, bias, eps)


def layer_norm_bwd(xhat, rstd, gain, dy):
    return _active.layer_norm_bwd(xhat, rstd, gain, dy)


def relu_fwd(x):
    return _active.relu_fwd(x)


def relu_bwd(x, dy):
    return _active.relu_bwd(x, dy)


def sigmoid_fwd(x):
    return _active.sigmoid_fwd(x)


def sigmoid_bwd(y, dy):
    return _active.sigmoid_bwd(y, dy)


def tanh_fwd(x):
    return _active.tanh_fwd(x)


def tanh_bwd(y, dy):
    return _active.tanh_bwd(y, dy)


def adam_update(p, g, m, v, t, lr, beta1, beta2, eps):
    return _active.adam_update(p, g, m, v, t, lr, beta1, beta2, eps)


def social_force_accel(pos, vel, goal, pref_speed, radius, relax_time,
                       rep_strength, rep_range, walls, pillars,
                       obs_strength, obs_range):
    return _active.social_force_accel(
        pos, vel, goal, pref_speed, radius, relax_time,
        rep_strength, rep_range, walls, pillars, obs_strength, obs_range)
