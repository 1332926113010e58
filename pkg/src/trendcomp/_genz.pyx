# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled lattice-rule integration kernel.

Scalar twin of ``_genz_py.qmc_shift_means``; shares the Cephes normal CDF
and quantile routines with the fallback so both backends evaluate the same
integrand at the same points.
"""

import numpy as np

from libc.math cimport fabs, floor
from scipy.special.cython_special cimport ndtr, ndtri

cdef double ARG_LO = 1e-15
cdef double ARG_HI = 1.0 - 1e-15


def qmc_shift_means(double[:, ::1] chol, double[::1] upper, double[::1] sqrt_primes,
                    double[:, ::1] shifts, Py_ssize_t npts):
    """Per-shift means of the sequential-conditioning integrand."""
    cdef Py_ssize_t m = upper.shape[0]
    cdef Py_ssize_t ns = shifts.shape[0]
    if m > 64:
        raise ValueError("kernel supports at most 64 dimensions")
    out_arr = np.empty(ns, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[64] yvals
    cdef Py_ssize_t s, j, i, l
    cdef double e_first, f, e_prev, w, u, arg, acc, total
    if chol[0, 0] > 0.0:
        e_first = ndtr(upper[0] / chol[0, 0])
    else:
        e_first = 1.0 if upper[0] >= 0.0 else 0.0
    with nogil:
        for s in range(ns):
            total = 0.0
            for j in range(1, npts + 1):
                f = e_first
                e_prev = e_first
                for i in range(1, m):
                    w = j * sqrt_primes[i - 1] + shifts[s, i - 1]
                    u = fabs(2.0 * (w - floor(w)) - 1.0)
                    arg = u * e_prev
                    if arg < ARG_LO:
                        arg = ARG_LO
                    elif arg > ARG_HI:
                        arg = ARG_HI
                    yvals[i - 1] = ndtri(arg)
                    acc = 0.0
                    for l in range(i):
                        acc += chol[i, l] * yvals[l]
                    if chol[i, i] > 0.0:
                        e_prev = ndtr((upper[i] - acc) / chol[i, i])
                    else:
                        e_prev = 1.0 if upper[i] >= acc else 0.0
                    f *= e_prev
                total += f
            out[s] = total / npts
    return out_arr
