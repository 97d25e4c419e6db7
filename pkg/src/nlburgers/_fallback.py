"""Pure numpy versions of the quadrature kernels in ``_core.pyx``.

Same pairing of +/-m offsets and the same offset order; numpy's pairwise
summation along the contiguous offset axis stands in for the compensated
loop. Memory is O(n^2) per call.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=16)
def _offsets(n):
    h = n // 2
    i = np.arange(n)[:, None]
    m = np.arange(1, h)[None, :]
    plus = (i + m) % n
    minus = (i - m) % n
    half = (np.arange(n) + h) % n
    return plus, minus, half


def pv_sum(f, g, w, nthreads=1):
    n = f.shape[0]
    h = n // 2
    plus, minus, half = _offsets(n)
    fi = f[:, None]
    terms = np.empty((n, h))
    terms[:, :-1] = w[1:h] * ((f[plus] - fi) * g[plus] + (f[minus] - fi) * g[minus])
    terms[:, -1] = w[h] * (f[half] - f) * g[half]
    return terms.sum(axis=1)


def w_sum(wv, r, w, nthreads=1):
    n = wv.shape[0]
    h = n // 2
    plus, minus, half = _offsets(n)
    wi = wv[:, None]
    ri = r[:, None]
    rp = r[plus]
    rm = r[minus]
    terms = np.empty((n, h))
    terms[:, :-1] = w[1:h] * ((wv[plus] - wi) * (2.0 * ri * rp / (ri + rp))
                              + (wv[minus] - wi) * (2.0 * ri * rm / (ri + rm)))
    rh = r[half]
    terms[:, -1] = w[h] * (wv[half] - wv) * (2.0 * r * rh / (r + rh))
    return terms.sum(axis=1)
