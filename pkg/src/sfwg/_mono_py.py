"""Pure-NumPy evaluation of scaled monomials and their derivatives.

Basis functions are ((x-cx)/h)^a ((y-cy)/h)^b with a+b <= degree, ordered
graded-lexicographically: degree blocks 0,1,...,m, and within a block the
x-exponent descends.  The first function is identically 1.
"""

import functools

import numpy as np


@functools.lru_cache(maxsize=None)
def monomial_exponents(degree):
    """Exponent pairs (ea, eb) for all monomials of total degree <= degree."""
    ea, eb = [], []
    for d in range(degree + 1):
        for i in range(d + 1):
            ea.append(d - i)
            eb.append(i)
    return np.array(ea, dtype=np.intp), np.array(eb, dtype=np.intp)


def monomial_table(pts, cx, cy, h, degree):
    """Values, gradients, and Laplacians of all scaled monomials at ``pts``.

    Returns arrays (vals, gx, gy, lap), each of shape (npoints, nbasis).
    Gradients and Laplacians are with respect to the physical coordinates,
    i.e. they carry the 1/h and 1/h^2 scale factors.
    """
    pts = np.asarray(pts, dtype=np.float64)
    x = (pts[:, 0] - cx) / h
    y = (pts[:, 1] - cy) / h
    q = x.shape[0]

    # Power tables px[:, a] = x**a, padded by two leading zero columns so
    # that exponent e-1 / e-2 lookups stay in range (factor e makes the
    # spurious columns irrelevant).
    px = np.ones((q, degree + 3))
    py = np.ones((q, degree + 3))
    for a in range(1, degree + 1):
        px[:, a + 2] = px[:, a + 1] * x
        py[:, a + 2] = py[:, a + 1] * y
    px[:, :2] = 0.0
    py[:, :2] = 0.0
    px[:, 2] = 1.0
    py[:, 2] = 1.0

    ea, eb = monomial_exponents(degree)
    fa = ea.astype(np.float64)
    fb = eb.astype(np.float64)

    vals = px[:, ea + 2] * py[:, eb + 2]
    gx = fa * px[:, ea + 1] * py[:, eb + 2] / h
    gy = fb * px[:, ea + 2] * py[:, eb + 1] / h
    lap = (
        fa * (fa - 1.0) * px[:, ea] * py[:, eb + 2]
        + fb * (fb - 1.0) * px[:, ea + 2] * py[:, eb]
    ) / (h * h)
    return vals, gx, gy, lap
