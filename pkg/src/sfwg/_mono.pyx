# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for scaled-monomial tables.

Mirrors _mono_py.monomial_table: same ordering, same return layout.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def monomial_table(pts, double cx, double cy, double h, int degree):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(
        pts, dtype=np.float64)
    cdef Py_ssize_t q = p.shape[0]
    cdef int ndim = (degree + 1) * (degree + 2) // 2

    cdef cnp.ndarray[cnp.float64_t, ndim=2] vals = np.empty((q, ndim))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gx = np.empty((q, ndim))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gy = np.empty((q, ndim))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lap = np.empty((q, ndim))

    cdef double[64] px
    cdef double[64] py
    cdef Py_ssize_t iq
    cdef int d, i, ea, eb, col
    cdef double x, y, inv_h = 1.0 / h, inv_h2 = 1.0 / (h * h)
    cdef double vx, vy, dgx, dgy, lp

    if degree + 1 > 64:
        raise ValueError("degree too large for the compiled kernel")

    for iq in range(q):
        x = (p[iq, 0] - cx) * inv_h
        y = (p[iq, 1] - cy) * inv_h
        px[0] = 1.0
        py[0] = 1.0
        for d in range(1, degree + 1):
            px[d] = px[d - 1] * x
            py[d] = py[d - 1] * y
        col = 0
        for d in range(degree + 1):
            for i in range(d + 1):
                ea = d - i
                eb = i
                vx = px[ea]
                vy = py[eb]
                vals[iq, col] = vx * vy
                dgx = ea * px[ea - 1] * vy * inv_h if ea > 0 else 0.0
                dgy = eb * vx * py[eb - 1] * inv_h if eb > 0 else 0.0
                gx[iq, col] = dgx
                gy[iq, col] = dgy
                lp = 0.0
                if ea > 1:
                    lp += ea * (ea - 1) * px[ea - 2] * vy
                if eb > 1:
                    lp += eb * (eb - 1) * vx * py[eb - 2]
                lap[iq, col] = lp * inv_h2
                col += 1
    return vals, gx, gy, lap
