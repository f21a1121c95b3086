# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused single-pass kernels for the saturable nonlinearity.

The Nehari bisection evaluates the pairing integrand on the full grid ~80
times per descent iteration; these loops avoid the temporaries the numpy
fallback allocates. Reduction order is a plain serial loop so results are
deterministic run to run.
"""

from libc.math cimport log


def saturable_triple(const double[::1] t, double s,
                     double[::1] out_f, double[::1] out_fp, double[::1] out_F):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef double x, x2, den
    cdef double inv2s = 1.0 / (2.0 * s)
    cdef double inv2s2 = 1.0 / (2.0 * s * s)
    for i in range(n):
        x = t[i]
        if x > 0.0:
            x2 = x * x
            den = 1.0 + s * x2
            out_f[i] = x * x2 / den
            out_fp[i] = x2 * (3.0 + s * x2) / (den * den)
            out_F[i] = x2 * inv2s - log(den) * inv2s2
        else:
            out_f[i] = 0.0
            out_fp[i] = 0.0
            out_F[i] = 0.0


def nehari_rate_sum(const double[::1] u, double t, double s):
    """sum_i f(t*u_i)*u_i / t with f the saturable nonlinearity."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double x, tx, tx2, acc = 0.0
    for i in range(n):
        x = u[i]
        if x > 0.0:
            tx = t * x
            tx2 = tx * tx
            acc += tx * tx2 / (1.0 + s * tx2) * x
    return acc / t


def energy_sums(const double[::1] u, const double[::1] v, double s):
    """(sum v*u^2, sum F(u), sum f(u)*u) in one pass."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double x, x2, den
    cdef double pot = 0.0, fint = 0.0, fu = 0.0
    cdef double inv2s = 1.0 / (2.0 * s)
    cdef double inv2s2 = 1.0 / (2.0 * s * s)
    for i in range(n):
        x = u[i]
        x2 = x * x
        pot += v[i] * x2
        if x > 0.0:
            den = 1.0 + s * x2
            fint += x2 * inv2s - log(den) * inv2s2
            fu += x2 * x2 / den
    return pot, fint, fu


def negative_sq_sum(const double[::1] u):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        if u[i] < 0.0:
            acc += u[i] * u[i]
    return acc
