# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled contraction kernels for far-field response evaluation.

Both kernels exploit the separable phase structure of a rectangular array:
the response at grid cell (i, j) is a short power series in the per-cell
horizontal phase factor ``base[i, j]``, with coefficients that depend only
on the zenith row.  Rows are independent, so the outer loop is parallel and
every output element is produced by exactly one thread (bit-reproducible
for any thread count).
"""

import numpy as np

from cython.parallel cimport prange


def pattern_forward(const double complex[:, ::1] coeffs,
                    const double complex[:, ::1] base):
    """out[i, j] = sum_m coeffs[i, m] * base[i, j]**m."""
    cdef Py_ssize_t h = base.shape[0]
    cdef Py_ssize_t w = base.shape[1]
    cdef Py_ssize_t n = coeffs.shape[1]
    cdef Py_ssize_t i, j, m
    cdef double complex acc, p, b
    out_arr = np.empty((h, w), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    for i in prange(h, nogil=True, schedule='static'):
        for j in range(w):
            b = base[i, j]
            acc = coeffs[i, 0]
            p = b
            for m in range(1, n):
                acc = acc + coeffs[i, m] * p
                p = p * b
            out[i, j] = acc
    return out_arr


def pattern_adjoint(const double complex[:, ::1] weights,
                    const double complex[:, ::1] base,
                    Py_ssize_t n):
    """out[i, m] = sum_j weights[i, j] * base[i, j]**m."""
    cdef Py_ssize_t h = base.shape[0]
    cdef Py_ssize_t w = base.shape[1]
    cdef Py_ssize_t i, j, m
    cdef double complex p, b
    out_arr = np.zeros((h, n), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    for i in prange(h, nogil=True, schedule='static'):
        for j in range(w):
            b = base[i, j]
            p = weights[i, j]
            for m in range(n):
                out[i, m] = out[i, m] + p
                p = p * b
    return out_arr
