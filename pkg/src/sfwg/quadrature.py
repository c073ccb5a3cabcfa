"""Quadrature rules on triangles, convex polygons, and edges.

Triangle rules are collapsed Gauss products (Duffy transform with a
Gauss-Jacobi rule absorbing the Jacobian), which gives positive weights and
exactness for any requested polynomial degree up to the cap.  Polygons are
integrated by fanning triangles from the centroid.
"""

import functools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

MAX_DEGREE = 50


class QuadratureDegreeError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    """Points (npts, 2), positive weights (npts,), and exactness degree.

    For edge rules ``params`` holds the arclength of each point measured
    from the first endpoint.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int
    params: np.ndarray | None = None


def _check_degree(d):
    if d > MAX_DEGREE:
        raise QuadratureDegreeError(
            f"quadrature degree {d} not implemented (max supported: {MAX_DEGREE})"
        )


@functools.lru_cache(maxsize=None)
def reference_triangle_rule(degree):
    """Rule on the unit triangle {x,y >= 0, x+y <= 1}, exact to ``degree``."""
    _check_degree(max(degree, 0))
    npt = degree // 2 + 1
    # xi direction: Gauss-Jacobi with weight (1-x) on [-1,1] absorbs the
    # Duffy Jacobian; eta direction: plain Gauss-Legendre.
    xj, wj = roots_jacobi(npt, 1, 0)
    xi = 0.5 * (xj + 1.0)
    wxi = 0.25 * wj
    tl, wl = leggauss(npt)
    eta = 0.5 * (tl + 1.0)
    weta = 0.5 * wl

    X = np.repeat(xi, npt)
    E = np.tile(eta, npt)
    pts = np.column_stack([X, E * (1.0 - X)])
    w = np.repeat(wxi, npt) * np.tile(weta, npt)
    return pts, w


def triangle_rule(v0, v1, v2, degree):
    """Rule on the physical triangle (v0, v1, v2), exact to ``degree``."""
    rp, rw = reference_triangle_rule(degree)
    v0 = np.asarray(v0, dtype=float)
    e1 = np.asarray(v1, dtype=float) - v0
    e2 = np.asarray(v2, dtype=float) - v0
    det = e1[0] * e2[1] - e1[1] * e2[0]
    pts = v0 + np.outer(rp[:, 0], e1) + np.outer(rp[:, 1], e2)
    return pts, rw * abs(det)


def quad_cell(polygon, degree):
    """Quadrature over a convex polygon, exact to ``degree``.

    Triangles get the collapsed Gauss rule directly; larger polygons are
    fanned from the centroid.
    """
    _check_degree(degree)
    polygon = np.asarray(polygon, dtype=float)
    nv = polygon.shape[0]
    if nv == 3:
        pts, w = triangle_rule(polygon[0], polygon[1], polygon[2], degree)
        return QuadratureRule(pts, w, degree)
    c = polygon_centroid(polygon)
    all_pts, all_w = [], []
    for i in range(nv):
        pts, w = triangle_rule(c, polygon[i], polygon[(i + 1) % nv], degree)
        all_pts.append(pts)
        all_w.append(w)
    return QuadratureRule(np.vstack(all_pts), np.concatenate(all_w), degree)


def quad_edge(p0, p1, degree):
    """Gauss rule on the segment p0->p1, exact to ``degree``."""
    _check_degree(degree)
    npt = max(1, -(-(degree + 1) // 2))
    t, w = leggauss(npt)
    t = 0.5 * (t + 1.0)
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    length = float(np.hypot(*(p1 - p0)))
    pts = p0 + np.outer(t, p1 - p0)
    return QuadratureRule(pts, 0.5 * w * length, degree, params=t * length)


def polygon_area(polygon):
    x = polygon[:, 0]
    y = polygon[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(polygon):
    x = polygon[:, 0]
    y = polygon[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * np.sum(cross)
    cx = np.sum((x + xn) * cross) / (6.0 * a)
    cy = np.sum((y + yn) * cross) / (6.0 * a)
    return np.array([cx, cy])
