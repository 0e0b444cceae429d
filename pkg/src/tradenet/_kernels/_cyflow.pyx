# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled accumulation loop for current-flow betweenness.

Same contract as the numpy fallback in ``_pure``: ``T[s, v]`` holds the
potential of node v under the grounded solve for column s (the matrix is
the symmetric padded inverse Laplacian, so rows and columns coincide).
Row-wise access keeps the two active potential rows in cache.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def accumulate_current_flow(double[:, ::1] T, cnp.intp_t[::1] edge_i,
                            cnp.intp_t[::1] edge_j, double[::1] edge_w):
    cdef Py_ssize_t n = T.shape[0]
    cdef Py_ssize_t m = edge_i.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    buf_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] buf = buf_arr
    cdef const double[:] ps, pt
    cdef Py_ssize_t s, t, k, v
    cdef cnp.intp_t a, b
    cdef double f

    if m == 0 or n < 2:
        return out_arr

    for s in range(n):
        ps = T[s]
        for t in range(s + 1, n):
            pt = T[t]
            for v in range(n):
                buf[v] = 0.0
            for k in range(m):
                a = edge_i[k]
                b = edge_j[k]
                f = edge_w[k] * (ps[a] - pt[a] - ps[b] + pt[b])
                if f < 0.0:
                    f = -f
                buf[a] += 0.5 * f
                buf[b] += 0.5 * f
            buf[s] = 0.0
            buf[t] = 0.0
            for v in range(n):
                out[v] += buf[v]
    return out_arr
