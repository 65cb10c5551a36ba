# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: Gaussian Gram matrices and weighted kernel sums.

Mirrors the pure-Python implementations in ``_kernelops_py``; the
dispatcher in ``kernelops`` picks whichever is importable.
"""

from libc.math cimport exp

import numpy as np

cimport numpy as cnp

cnp.import_array()


def gram(double[:, ::1] pts, double inv_scale):
    """Symmetric matrix exp(-inv_scale * ||p_i - p_j||^2)."""
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, n))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double dx, dy, v
    for i in range(n):
        o[i, i] = 1.0
        for j in range(i + 1, n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            v = exp(-inv_scale * (dx * dx + dy * dy))
            o[i, j] = v
            o[j, i] = v
    return out


def cross_kernel_sum(double[:, ::1] xs, double[:, ::1] atoms,
                     double[::1] coeffs, double inv_scale):
    """For each row x of xs: sum_j coeffs[j] * exp(-inv_scale*||x - atom_j||^2)."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m = atoms.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double dx, dy, acc
    for i in range(n):
        acc = 0.0
        for j in range(m):
            dx = xs[i, 0] - atoms[j, 0]
            dy = xs[i, 1] - atoms[j, 1]
            acc += coeffs[j] * exp(-inv_scale * (dx * dx + dy * dy))
        o[i] = acc
    return out
