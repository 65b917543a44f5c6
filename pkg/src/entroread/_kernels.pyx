# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled entropy kernels.

Mirrors ``entroread._kernels_py``: natural-log probability rows in,
entropies in bits out.  One pass finds the row maximum, a second pass
accumulates every requested order, so huge vocabularies never allocate
per-order temporaries.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, isinf

cnp.import_array()

LN2 = log(2.0)

IMPL = "cython"


def renyi_grid(logprobs, alphas, double support_logeps):
    """Renyi entropies (bits) for each logprob row at each order."""
    lp_arr = np.ascontiguousarray(logprobs, dtype=np.float64)
    if lp_arr.ndim == 1:
        lp_arr = lp_arr[None, :]
    a_arr = np.ascontiguousarray(alphas, dtype=np.float64)

    cdef double[:, ::1] lp = lp_arr
    cdef double[::1] al = a_arr
    cdef Py_ssize_t n = lp.shape[0], v = lp.shape[1], na = al.shape[0]

    out_arr = np.empty((n, na), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    cdef double ln2 = log(2.0)
    cdef Py_ssize_t i, j, k
    cdef double m, x, a, acc, h
    cdef long support

    for i in range(n):
        m = -np.inf
        for k in range(v):
            if lp[i, k] > m:
                m = lp[i, k]
        for j in range(na):
            a = al[j]
            if a == 0.0:
                support = 0
                for k in range(v):
                    if lp[i, k] > support_logeps:
                        support += 1
                h = log(<double> support) / ln2
            elif a == 1.0:
                acc = 0.0
                for k in range(v):
                    x = lp[i, k]
                    if not isinf(x):
                        acc += exp(x) * x
                h = -acc / ln2
            elif isinf(a):
                h = -m / ln2
            else:
                acc = 0.0
                for k in range(v):
                    x = lp[i, k]
                    if not isinf(x):
                        acc += exp(a * (x - m))
                h = (a * m + log(acc)) / ((1.0 - a) * ln2)
            if h < 0.0:
                h = 0.0
            out[i, j] = h

    return out_arr


def shannon_rows(logprobs):
    """Shannon entropy (bits) per row; shorthand for renyi_grid at order 1."""
    return renyi_grid(logprobs, np.array([1.0]), -np.inf)[:, 0]
