"""Polynomial bases on cells and edges, mass matrices, and L2 projections.

Cell bases are scaled monomials centered at the cell centroid (scaling by
the cell diameter keeps the mass matrices well conditioned under
refinement).  Edge bases are Legendre polynomials in arclength, normalized
to be orthonormal with respect to the edge line integral.
"""

import numpy as np
from numpy.polynomial.legendre import legvander

from . import backend
from .quadrature import quad_cell, quad_edge


class SingularCellError(RuntimeError):
    """Raised when a cell mass matrix cannot be factorized."""


def dim_pk(m: int) -> int:
    return (m + 1) * (m + 2) // 2


class CellBasis:
    """Scaled monomial basis of P_m on a cell with given centroid/diameter."""

    def __init__(self, degree: int, centroid, diameter: float):
        self.degree = degree
        self.centroid = np.asarray(centroid, dtype=float)
        self.diameter = float(diameter)
        self.dim = dim_pk(degree)

    def tables(self, pts):
        """(values, d/dx, d/dy, Laplacian) tables, each (npts, dim)."""
        return backend.monomial_table(
            np.ascontiguousarray(pts, dtype=np.float64),
            self.centroid[0],
            self.centroid[1],
            self.diameter,
            self.degree,
        )

    def values(self, pts):
        return self.tables(pts)[0]

    def gradients(self, pts):
        v, gx, gy, lap = self.tables(pts)
        return np.stack([gx, gy], axis=-1)

    def laplacians(self, pts):
        return self.tables(pts)[3]


class EdgeBasis:
    """Orthonormal polynomial basis of P_m(e) in the arclength parameter.

    Arclength runs from ``p0`` to ``p1``; basis i is
    sqrt((2i+1)/L) * P_i(2s/L - 1) with P_i the Legendre polynomial, so the
    Gram matrix over the edge is exactly the identity.
    """

    def __init__(self, degree: int, p0, p1):
        self.degree = degree
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)
        self.length = float(np.hypot(*(self.p1 - self.p0)))
        self.dim = degree + 1
        self._scale = np.sqrt((2.0 * np.arange(self.dim) + 1.0) / self.length)

    def values(self, s):
        """Basis values at arclength positions ``s`` in [0, L]."""
        t = 2.0 * np.asarray(s, dtype=float) / self.length - 1.0
        return legvander(t, self.degree) * self._scale


def mass_matrix_cell(polygon, basis: CellBasis, rule=None):
    """Gram matrix of the cell basis, integrated exactly (degree 2m)."""
    if rule is None:
        rule = quad_cell(polygon, 2 * basis.degree)
    v = basis.values(rule.points)
    m = v.T @ (rule.weights[:, None] * v)
    if not np.all(np.isfinite(m)):
        raise SingularCellError("non-finite cell mass matrix (degenerate cell?)")
    return m


def mass_matrix_edge(ebasis: EdgeBasis):
    """Edge Gram matrix; identity up to quadrature roundoff."""
    rule = quad_edge(ebasis.p0, ebasis.p1, 2 * ebasis.degree)
    v = ebasis.values(rule.params)
    return v.T @ (rule.weights[:, None] * v)


def project_cell(f, polygon, basis: CellBasis, rule=None):
    """Coefficients of the L2(T) projection of ``f`` onto the cell basis.

    ``f`` maps an (npts, 2) array of points to values.
    """
    if rule is None:
        rule = quad_cell(polygon, 2 * basis.degree + 2)
    v = basis.values(rule.points)
    r = v.T @ (rule.weights * np.asarray(f(rule.points), dtype=float))
    m = v.T @ (rule.weights[:, None] * v)
    try:
        return np.linalg.solve(m, r)
    except np.linalg.LinAlgError as exc:
        raise SingularCellError(f"singular cell mass matrix: {exc}") from exc


def project_edge(g, ebasis: EdgeBasis, rule=None):
    """Coefficients of the L2(e) projection of ``g`` onto the edge basis.

    The basis is orthonormal, so projection is a plain inner product.
    ``g`` maps an (npts, 2) array of physical points to values.
    """
    if rule is None:
        rule = quad_edge(ebasis.p0, ebasis.p1, 2 * ebasis.degree + 2)
    v = ebasis.values(rule.params)
    return v.T @ (rule.weights * np.asarray(g(rule.points), dtype=float))
