# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same signatures as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, M_PI

cnp.import_array()


def scatter_add_rows(const cnp.int64_t[::1] index, const double[:, ::1] src, Py_ssize_t n_out):
    cdef Py_ssize_t n = src.shape[0], d = src.shape[1], i, j, r
    out_arr = np.zeros((n_out, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        r = index[i]
        if r < 0 or r >= n_out:
            raise IndexError("scatter index %d out of range [0, %d)" % (r, n_out))
        for j in range(d):
            out[r, j] += src[i, j]
    return out_arr


def gaussian_forward(const double[::1] x, const double[::1] mu, const double[::1] sigma):
    cdef Py_ssize_t n = x.shape[0], k = mu.shape[0], i, j
    cdef double z, c = 1.0 / sqrt(2.0 * M_PI)
    out_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] inv_s = np.empty(k, dtype=np.float64)
    for j in range(k):
        inv_s[j] = 1.0 / sigma[j]
    with nogil:
        for i in range(n):
            for j in range(k):
                z = (x[i] - mu[j]) * inv_s[j]
                out[i, j] = exp(-0.5 * z * z) * c * inv_s[j]
    return out_arr


def gaussian_backward(const double[::1] x, const double[::1] mu, const double[::1] sigma,
                      const double[:, ::1] out, const double[:, ::1] gout):
    cdef Py_ssize_t n = x.shape[0], k = mu.shape[0], i, j
    cdef double diff, go, t, acc
    gx_arr = np.zeros(n, dtype=np.float64)
    gmu_arr = np.zeros(k, dtype=np.float64)
    gs_arr = np.zeros(k, dtype=np.float64)
    cdef double[::1] gx = gx_arr, gmu = gmu_arr, gs = gs_arr
    cdef double[::1] inv_s = np.empty(k, dtype=np.float64)
    cdef double[::1] inv_s2 = np.empty(k, dtype=np.float64)
    for j in range(k):
        inv_s[j] = 1.0 / sigma[j]
        inv_s2[j] = inv_s[j] * inv_s[j]
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(k):
                diff = x[i] - mu[j]
                go = gout[i, j] * out[i, j]
                t = go * diff * inv_s2[j]
                acc = acc + t
                gmu[j] += t
                gs[j] += go * (diff * diff * inv_s2[j] * inv_s[j] - inv_s[j])
            gx[i] = -acc
    return gx_arr, gmu_arr, gs_arr


def pairwise_distances(const double[:, ::1] coords):
    cdef Py_ssize_t n = coords.shape[0], i, j, c
    cdef double s, dd
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                s = 0.0
                for c in range(coords.shape[1]):
                    dd = coords[i, c] - coords[j, c]
                    s = s + dd * dd
                s = sqrt(s)
                out[i, j] = s
                out[j, i] = s
    return out_arr


def softmax_rows(const double[:, ::1] x):
    cdef Py_ssize_t m = x.shape[0], n = x.shape[1], i, j
    cdef double mx, s
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(m):
            mx = x[i, 0]
            for j in range(1, n):
                if x[i, j] > mx:
                    mx = x[i, j]
            s = 0.0
            for j in range(n):
                out[i, j] = exp(x[i, j] - mx)
                s = s + out[i, j]
            for j in range(n):
                out[i, j] = out[i, j] / s
    return out_arr


def softmax_rows_backward(const double[:, ::1] y, const double[:, ::1] gy):
    cdef Py_ssize_t m = y.shape[0], n = y.shape[1], i, j
    cdef double dot
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(m):
            dot = 0.0
            for j in range(n):
                dot = dot + gy[i, j] * y[i, j]
            for j in range(n):
                out[i, j] = y[i, j] * (gy[i, j] - dot)
    return out_arr
