# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the numpy kernels in ``_pykernels``.

Same signatures, same semantics.  Scalar loops over typed memoryviews;
no BLAS here (matrix products stay on numpy in both backends).
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt, tanh as ctanh, INFINITY

cnp.import_array()


def softmax_lastdim(double[:, ::1] x):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    out_arr = np.empty((rows, cols))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double m, s, e
    for i in range(rows):
        m = x[i, 0]
        for j in range(1, cols):
            if x[i, j] > m:
                m = x[i, j]
        s = 0.0
        for j in range(cols):
            e = exp(x[i, j] - m)
            out[i, j] = e
            s += e
        for j in range(cols):
            out[i, j] /= s
    return out_arr


def softmax_lastdim_bwd(double[:, ::1] y, double[:, ::1] dy):
    cdef Py_ssize_t rows = y.shape[0], cols = y.shape[1]
    out_arr = np.empty((rows, cols))
    cdef double[:, ::1] dx = out_arr
    cdef Py_ssize_t i, j
    cdef double dot
    for i in range(rows):
        dot = 0.0
        for j in range(cols):
            dot += y[i, j] * dy[i, j]
        for j in range(cols):
            dx[i, j] = y[i, j] * (dy[i, j] - dot)
    return out_arr


def layer_norm_fwd(double[:, ::1] x, double[::1] gain, double[::1] bias, double eps):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    y_arr = np.empty((rows, cols))
    xhat_arr = np.empty((rows, cols))
    rstd_arr = np.empty(rows)
    cdef double[:, ::1] y = y_arr, xhat = xhat_arr
    cdef double[::1] rstd = rstd_arr
    cdef Py_ssize_t i, j
    cdef double mu, var, r, xc
    for i in range(rows):
        mu = 0.0
        for j in range(cols):
            mu += x[i, j]
        mu /= cols
        var = 0.0
        for j in range(cols):
            xc = x[i, j] - mu
            var += xc * xc
        var /= cols
        r = 1.0 / sqrt(var + eps)
        rstd[i] = r
        for j in range(cols):
            xc = (x[i, j] - mu) * r
            xhat[i, j] = xc
            y[i, j] = xc * gain[j] + bias[j]
    return y_arr, xhat_arr, rstd_arr


def layer_norm_bwd(double[:, ::1] xhat, double[::1] rstd, double[::1] gain,
                   double[:, ::1] dy):
    cdef Py_ssize_t rows = xhat.shape[0], cols = xhat.shape[1]
    dx_arr = np.empty((rows, cols))
    dgain_arr = np.zeros(cols)
    dbias_arr = np.zeros(cols)
    cdef double[:, ::1] dx = dx_arr
    cdef double[::1] dgain = dgain_arr, dbias = dbias_arr
    cdef Py_ssize_t i, j
    cdef double s1, s2, dxh, n = <double> cols
    for i in range(rows):
        s1 = 0.0
        s2 = 0.0
        for j in range(cols):
            dgain[j] += dy[i, j] * xhat[i, j]
            dbias[j] += dy[i, j]
            dxh = dy[i, j] * gain[j]
            s1 += dxh
            s2 += dxh * xhat[i, j]
        for j in range(cols):
            dxh = dy[i, j] * gain[j]
            dx[i, j] = (dxh - s1 / n - xhat[i, j] * (s2 / n)) * rstd[i]
    return dx_arr, dgain_arr, dbias_arr


cdef _flat(arr):
    return np.ascontiguousarray(arr).reshape(-1)


def relu_fwd(x):
    shape = np.shape(x)
    xf_arr = _flat(x)
    cdef double[::1] xf = xf_arr
    out_arr = np.empty(xf_arr.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(xf.shape[0]):
        out[i] = xf[i] if xf[i] > 0.0 else 0.0
    return out_arr.reshape(shape)


def relu_bwd(x, dy):
    shape = np.shape(x)
    xf_arr = _flat(x)
    dyf_arr = _flat(dy)
    cdef double[::1] xf = xf_arr, dyf = dyf_arr
    out_arr = np.empty(xf_arr.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(xf.shape[0]):
        out[i] = dyf[i] if xf[i] > 0.0 else 0.0
    return out_arr.reshape(shape)


def sigmoid_fwd(x):
    shape = np.shape(x)
    xf_arr = _flat(x)
    cdef double[::1] xf = xf_arr
    out_arr = np.empty(xf_arr.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double e
    for i in range(xf.shape[0]):
        if xf[i] >= 0.0:
            out[i] = 1.0 / (1.0 + exp(-xf[i]))
        else:
            e = exp(xf[i])
            out[i] = e / (1.0 + e)
    return out_arr.reshape(shape)


def sigmoid_bwd(y, dy):
    shape = np.shape(y)
    yf_arr = _flat(y)
    dyf_arr = _flat(dy)
    cdef double[::1] yf = yf_arr, dyf = dyf_arr
    out_arr = np.empty(yf_arr.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(yf.shape[0]):
        out[i] = dyf[i] * yf[i] * (1.0 - yf[i])
    return out_arr.reshape(shape)


def tanh_fwd(x):
    shape = np.shape(x)
    xf_arr = _flat(x)
    cdef double[::1] xf = xf_arr
    out_arr = np.empty(xf_arr.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(xf.shape[0]):
        out[i] = ctanh(xf[i])
    return out_arr.reshape(shape)


def tanh_bwd(y, dy):
    shape = np.shape(y)
    yf_arr = _flat(y)
    dyf_arr = _flat(dy)
    cdef double[::1] yf = yf_arr, dyf = dyf_arr
    out_arr = np.empty(yf_arr.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(yf.shape[0]):
        out[i] = dyf[i] * (1.0 - yf[i] * yf[i])
    return out_arr.reshape(shape)


def adam_update(double[::1] p, double[::1] g, double[::1] m, double[::1] v,
                long t, double lr, double beta1, double beta2, double eps):
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double bc1 = 1.0 - beta1 ** t
    cdef double bc2 = 1.0 - beta2 ** t
    cdef double mhat, vhat
    for i in range(n):
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i])
        mhat = m[i] / bc1
        vhat = v[i] / bc2
        p[i] -= lr * mhat / (sqrt(vhat) + eps)


def social_force_accel(double[:, ::1] pos, double[:, ::1] vel,
                       double[:, ::1] goal, double[::1] pref_speed,
                       double[::1] radius, double relax_time,
                       double rep_strength, double rep_range,
                       walls, double[:, ::1] pillars,
                       double obs_strength, double obs_range):
    cdef Py_ssize_t n = pos.shape[0]
    acc_arr = np.zeros((n, 2))
    cdef double[:, ::1] acc = acc_arr
    cdef double xmin = walls[0], xmax = walls[1], ymin = walls[2], ymax = walls[3]
    cdef Py_ssize_t i, j, k
    cdef double gx, gy, dist, dvx, dvy, dx, dy, d, rsum, mag, cx, cy, cr

    for i in range(n):
        gx = goal[i, 0] - pos[i, 0]
        gy = goal[i, 1] - pos[i, 1]
        dist = sqrt(gx * gx + gy * gy)
        if dist > 1e-9:
            dvx = gx / dist * pref_speed[i]
            dvy = gy / dist * pref_speed[i]
        else:
            dvx = 0.0
            dvy = 0.0
        acc[i, 0] += (dvx - vel[i, 0]) / relax_time
        acc[i, 1] += (dvy - vel[i, 1]) / relax_time

        for j in range(n):
            if j == i:
                continue
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            d = sqrt(dx * dx + dy * dy)
            if d == 0.0:
                continue
            rsum = radius[i] + radius[j]
            mag = rep_strength * exp((rsum - d) / rep_range)
            acc[i, 0] += mag * dx / d
            acc[i, 1] += mag * dy / d

        acc[i, 0] += obs_strength * exp((radius[i] - (pos[i, 0] - xmin)) / obs_range)
        acc[i, 0] -= obs_strength * exp((radius[i] - (xmax - pos[i, 0])) / obs_range)
        acc[i, 1] += obs_strength * exp((radius[i] - (pos[i, 1] - ymin)) / obs_range)
        acc[i, 1] -= obs_strength * exp((radius[i] - (ymax - pos[i, 1])) / obs_range)

        for k in range(pillars.shape[0]):
            cx = pos[i, 0] - pillars[k, 0]
            cy = pos[i, 1] - pillars[k, 1]
            cr = pillars[k, 2]
            d = sqrt(cx * cx + cy * cy)
            if d < 1e-9:
                d = 1e-9
            mag = obs_strength * exp((radius[i] + cr - d) / obs_range)
            acc[i, 0] += mag * cx / d
            acc[i, 1] += mag * cy / d

    return acc_arr
