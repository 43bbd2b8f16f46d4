"""Numpy implementations of the numeric hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with identical
semantics.  Inputs are float64 C-contiguous arrays; outputs are freshly
allocated.  Matrix products are deliberately absent: those stay on
numpy/BLAS in both backends.
"""
import numpy as np


def softmax_lastdim(x):
    """Row softmax over the last axis of a 2D array, max-subtracted."""
    m = np.max(x, axis=1, keepdims=True)
    e = np.exp(x - m)
    return e / np.sum(e, axis=1, keepdims=True)


def softmax_lastdim_bwd(y, dy):
    # dx_i = y_i * (dy_i - sum_j y_j dy_j)
    dot = np.sum(y * dy, axis=1, keepdims=True)
    return y * (dy - dot)


def layer_norm_fwd(x, gain, bias, eps):
    """Normalize each row of a 2D array; returns (y, xhat, rstd)."""
    mu = np.mean(x, axis=1, keepdims=True)
    xc = x - mu
    var = np.mean(xc * xc, axis=1)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = xc * rstd[:, None]
    return xhat * gain + bias, xhat, rstd


def layer_norm_bwd(xhat, rstd, gain, dy):
    n = xhat.shape[1]
    dgain = np.sum(dy * xhat, axis=0)
    dbias = np.sum(dy, axis=0)
    dxhat = dy * gain
    s1 = np.sum(dxhat, axis=1, keepdims=True)
    s2 = np.sum(dxhat * xhat, axis=1, keepdims=True)
    dx = (dxhat - s1 / n - xhat * (s2 / n)) * rstd[:, None]
    return dx, dgain, dbias


def relu_fwd(x):
    return np.maximum(x, 0.0)


def relu_bwd(x, dy):
    # subgradient 0 at x == 0
    return np.where(x > 0.0, dy, 0.0)


def sigmoid_fwd(x):
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_bwd(y, dy):
    return dy * y * (1.0 - y)


def tanh_fwd(x):
    return np.tanh(x)


def tanh_bwd(y, dy):
    return dy * (1.0 - y * y)


def adam_update(p, g, m, v, t, lr, beta1, beta2, eps):
    """One fused Adam step, in place on flat arrays p, m, v."""
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * (g * g)
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    mhat = m / bc1
    vhat = v / bc2
    p -= lr * mhat / (np.sqrt(vhat) + eps)


def social_force_accel(pos, vel, goal, pref_speed, radius, relax_time,
                       rep_strength, rep_range, walls, pillars,
                       obs_strength, obs_range):
    """Accelerations for every agent of a 2D crowd.

    pos, vel, goal: (n, 2). pref_speed, radius: (n,).
    walls: (xmin, xmax, ymin, ymax) arena bounds. pillars: (k, 3) rows
    of (cx, cy, r), may be empty. Returns (n, 2).
    """
    n = pos.shape[0]
    acc = np.zeros((n, 2))

    # goal attraction, relaxation to preferred velocity
    to_goal = goal - pos
    dist = np.sqrt(np.sum(to_goal * to_goal, axis=1))
    far = dist > 1e-9
    desired = np.zeros_like(pos)
    desired[far] = to_goal[far] / dist[far, None] * pref_speed[far, None]
    acc += (desired - vel) / relax_time

    # pairwise repulsion, exponential in surface gap
    diff = pos[:, None, :] - pos[None, :, :]          # (n, n, 2)
    d = np.sqrt(np.sum(diff * diff, axis=2))
    np.fill_diagonal(d, np.inf)
    d[d == 0.0] = np.inf          # coincident agents exert no force
    rsum = radius[:, None] + radius[None, :]
    mag = rep_strength * np.exp((rsum - d) / rep_range)
    push = mag[:, :, None] * diff / d[:, :, None]
    acc += np.sum(push, axis=1)

    # arena walls push inward along each axis
    xmin, xmax, ymin, ymax = walls
    acc[:, 0] += obs_strength * np.exp((radius - (pos[:, 0] - xmin)) / obs_range)
    acc[:, 0] -= obs_strength * np.exp((radius - (xmax - pos[:, 0])) / obs_range)
    acc[:, 1] += obs_strength * np.exp((radius - (pos[:, 1] - ymin)) / obs_range)
    acc[:, 1] -= obs_strength * np.exp((radius - (ymax - pos[:, 1])) / obs_range)

    # circular pillars
    for k in range(pillars.shape[0]):
        cx, cy, cr = pillars[k]
        dvec = pos - np.array((cx, cy))
        dd = np.sqrt(np.sum(dvec * dvec, axis=1))
        dd = np.maximum(dd, 1e-9)
        mag_p = obs_strength * np.exp((radius + cr - dd) / obs_range)
        acc += mag_p[:, None] * dvec / dd[:, None]

    return acc
