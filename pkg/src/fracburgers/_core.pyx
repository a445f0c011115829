# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: O(n^2) physical-space oracles and trigonometric evaluation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def second_difference_sum(g, weights, bint periodic=True):
    g = np.ascontiguousarray(g, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    cdef Py_ssize_t M = wv.shape[0]
    # pad once (wrapped or zero) so the inner loop has no index arithmetic
    idx = np.arange(-M, n + M)
    if periodic:
        ext = g[idx % n]
    else:
        ext = np.where((idx >= 0) & (idx < n), g[np.clip(idx, 0, n - 1)], 0.0)
    cdef const double[::1] ev = np.ascontiguousarray(ext)
    out = np.zeros(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, m, c
    cdef double acc, wsum = 0.0
    for m in range(M):
        wsum += wv[m]
    for i in range(n):
        c = i + M
        acc = 0.0
        for m in range(1, M + 1):
            acc += wv[m - 1] * (ev[c + m] + ev[c - m])
        ov[i] = 2.0 * wsum * ev[c] - acc
    return out


def circular_convolve(f, kernel):
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] kv = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0]
    out = np.zeros(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, m, idx
    cdef double acc
    for i in range(n):
        acc = 0.0
        for m in range(n):
            if kv[m] != 0.0:
                idx = i - m
                if idx < 0:
                    idx += n
                acc += kv[m] * fv[idx]
        ov[i] = acc
    return out


def trig_eval(coeffs, freqs, double s):
    cdef const double complex[::1] cv = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef const double[::1] xv = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef Py_ssize_t k, n = cv.shape[0]
    cdef double f0 = 0.0, f1 = 0.0, f2 = 0.0
    cdef double c, sn, re, im, xi, pr, pi
    for k in range(n):
        xi = xv[k]
        c = cos(xi * s)
        sn = sin(xi * s)
        re = cv[k].real
        im = cv[k].imag
        pr = re * c - im * sn
        pi = re * sn + im * c
        f0 += pr
        f1 -= xi * pi
        f2 -= xi * xi * pr
    return f0, f1, f2
