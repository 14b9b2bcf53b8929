# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation core: tight loops over points and terms.

Contract matches ``pure.py``; selected at import by ``_backends.__init__``.
"""
import numpy as np

cimport cython
from libc.math cimport exp as cexp_real, cos as ccos, sin as csin


cdef inline double complex cexp(double complex z) nogil:
    cdef double m = cexp_real(z.real)
    return m * ccos(z.imag) + 1j * m * csin(z.imag)


def eval_exppoly(const double complex[::1] mu,
                 const double complex[::1] coeffs,
                 const long long[::1] offsets,
                 const double[::1] xs):
    cdef Py_ssize_t nterms = mu.shape[0]
    cdef Py_ssize_t npts = xs.shape[0]
    out_arr = np.zeros(npts, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t k, p, j
    cdef long long lo, hi
    cdef double complex acc, m
    cdef double x
    with nogil:
        for p in range(npts):
            x = xs[p]
            acc = 0
            for k in range(nterms):
                lo = offsets[k]
                hi = offsets[k + 1]
                m = coeffs[hi - 1]
                for j in range(hi - 2, lo - 1, -1):
                    m = m * x + coeffs[j]
                acc = acc + m * cexp(mu[k] * x)
            out[p] = acc
    return out_arr


def eval_bivariate(const double complex[::1] mut,
                   const double complex[::1] mus,
                   const double complex[::1] mats,
                   const long long[::1] offsets,
                   const long long[::1] nrows,
                   const long long[::1] ncols,
                   const double[::1] ts,
                   const double[::1] ss):
    cdef Py_ssize_t nterms = mut.shape[0]
    cdef Py_ssize_t npts = ts.shape[0]
    out_arr = np.zeros(npts, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t k, p, i, j
    cdef long long base, nr, nc
    cdef double complex acc, row, val
    cdef double t, s
    with nogil:
        for p in range(npts):
            t = ts[p]
            s = ss[p]
            acc = 0
            for k in range(nterms):
                base = offsets[k]
                nr = nrows[k]
                nc = ncols[k]
                val = 0
                for i in range(nr - 1, -1, -1):
                    row = mats[base + i * nc + nc - 1]
                    for j in range(nc - 2, -1, -1):
                        row = row * s + mats[base + i * nc + j]
                    val = val * t + row
                acc = acc + val * cexp(mut[k] * t + mus[k] * s)
            out[p] = acc
    return out_arr
