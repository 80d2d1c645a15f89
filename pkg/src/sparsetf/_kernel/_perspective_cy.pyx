# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled entry-wise kernels for the coupled magnitude prox.

Semantics are identical to ``perspective_np``; this version does the case
split and Cardano arithmetic in a single pass per entry.
"""

from libc.math cimport atan2, cbrt, cos, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef double _positive_cubic_root(double p, double q) noexcept nogil:
    # Unique positive root of s^3 + p s + q = 0, q < 0.
    cdef double r = -0.25 * q * q - (p * p * p) / 27.0
    cdef double half = -0.5 * q
    cdef double s, disc, f, df
    if r < 0.0:
        disc = sqrt(-r)
        s = cbrt(half + disc) + cbrt(half - disc)
    elif r > 0.0:
        # q < 0, so atan2(2 sqrt(r), -q) = arctan(-2 sqrt(r)/q) in (0, pi/2).
        s = 2.0 * cbrt(sqrt(0.25 * q * q + r)) * cos(atan2(2.0 * sqrt(r), -q) / 3.0)
    else:
        s = 2.0 * cbrt(half)
    f = s * (s * s + p) + q
    df = 3.0 * s * s + p
    if df > 0.0:
        s -= f / df
    return s


def positive_cubic_roots(cnp.ndarray p_arr, cnp.ndarray q_arr):
    """Vectorized positive cubic root; mirrors perspective_np."""
    cdef double[::1] p = np.ascontiguousarray(p_arr, dtype=np.float64)
    cdef double[::1] q = np.ascontiguousarray(q_arr, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            out[k] = _positive_cubic_root(p[k], q[k])
    return out_arr


def prox_pairs(cnp.ndarray x_arr, cnp.ndarray sigma_arr, double tau):
    """Entry-wise prox of tau * phi on flat (coefficient, weight) pairs."""
    cdef double complex[::1] x = np.ascontiguousarray(x_arr, dtype=np.complex128)
    cdef double[::1] sigma = np.ascontiguousarray(sigma_arr, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    x_out_arr = np.empty(n, dtype=np.complex128)
    sigma_out_arr = np.empty(n, dtype=np.float64)
    cdef double complex[::1] x_out = x_out_arr
    cdef double[::1] sigma_out = sigma_out_arr
    cdef Py_ssize_t k
    cdef double a, s, sk
    cdef double complex xk
    with nogil:
        for k in range(n):
            xk = x[k]
            sk = sigma[k]
            a = sqrt(xk.real * xk.real + xk.imag * xk.imag)
            if 2.0 * tau * sk + a * a <= tau * tau:
                x_out[k] = 0.0
                sigma_out[k] = 0.0
            elif a == 0.0:
                x_out[k] = 0.0
                sigma_out[k] = sk - 0.5 * tau
            else:
                s = _positive_cubic_root(2.0 * sk / tau + 1.0, -2.0 * a / tau)
                x_out[k] = xk * (1.0 - tau * s / a)
                sigma_out[k] = sk + 0.5 * tau * (s * s - 1.0)
    return x_out_arr, sigma_out_arr
