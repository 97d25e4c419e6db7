# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled O(n^2) quadrature kernels.

Every output node is reduced by a single thread, over offsets m = 1..n/2 in
ascending order, with Neumaier-compensated accumulation. Results are
therefore bit-identical for any thread count and exactly equivariant under
grid-aligned shifts. Do not build with -ffast-math: it removes the
compensation.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport fabs

cnp.import_array()


cdef inline void _acc(double x, double* s, double* c) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def pv_sum(const double[::1] f, const double[::1] g, const double[::1] w,
           int nthreads=1):
    """out_i = sum_{m != 0} w[m] (f[i+m] - f[i]) g[i+m], +/-m terms paired."""
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t h = n // 2
    cdef Py_ssize_t i, m, ip, im
    cdef double s, c, fi
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
        s = 0.0
        c = 0.0
        fi = f[i]
        for m in range(1, h):
            ip = i + m
            if ip >= n:
                ip = ip - n
            im = i - m
            if im < 0:
                im = im + n
            _acc(w[m] * ((f[ip] - fi) * g[ip] + (f[im] - fi) * g[im]), &s, &c)
        ip = i + h
        if ip >= n:
            ip = ip - n
        _acc(w[h] * (f[ip] - fi) * g[ip], &s, &c)
        o[i] = s + c
    return out


def w_sum(const double[::1] wv, const double[::1] r, const double[::1] w,
          int nthreads=1):
    """out_i = sum_{m != 0} w[m] (wv[i+m] - wv[i]) * 2 r_i r_{i+m} / (r_i + r_{i+m})."""
    cdef Py_ssize_t n = wv.shape[0]
    cdef Py_ssize_t h = n // 2
    cdef Py_ssize_t i, m, ip, im
    cdef double s, c, wi, ri
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
        s = 0.0
        c = 0.0
        wi = wv[i]
        ri = r[i]
        for m in range(1, h):
            ip = i + m
            if ip >= n:
                ip = ip - n
            im = i - m
            if im < 0:
                im = im + n
            _acc(w[m] * ((wv[ip] - wi) * (2.0 * ri * r[ip] / (ri + r[ip]))
                         + (wv[im] - wi) * (2.0 * ri * r[im] / (ri + r[im]))),
                 &s, &c)
        ip = i + h
        if ip >= n:
            ip = ip - n
        _acc(w[h] * (wv[ip] - wi) * (2.0 * ri * r[ip] / (ri + r[ip])), &s, &c)
        o[i] = s + c
    return out
