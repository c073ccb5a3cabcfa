"""Error measures and observed convergence rates.

Three functionals are reported per run:

* energy error  |||u - u_h||| = (sum_T ||Pi_j lap u - Lw u_h||^2_T)^(1/2),
  using that the weak Laplacian of a smooth field is the P_j projection of
  its Laplacian;
* broken H2 error ||u - u_h||_{2,h} with h-weighted edge jump terms, where
  the smooth field contributes its analytic traces;
* the plain L2 error of the cell-interior part.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import CellBasis, EdgeBasis, project_cell
from .quadrature import quad_cell, quad_edge
from .weakop import (
    WeakFunction,
    cell_rule_degree,
    edge_rule_degree,
    element_weak_laplacian,
)


@dataclass
class ExactSolution:
    """Closed-form manufactured solution: u, grad u, lap u, f = lap^2 u."""

    name: str
    u: callable
    grad: callable        # (q, 2) points -> (q, 2)
    laplacian: callable
    source: callable


@dataclass
class ConvergenceReport:
    """Rows of (n, h, error triple with rates); rates use log(e_prev/e)/log(h_prev/h)."""

    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add_row(self, n, h, errors):
        rates = [None, None, None]
        if self.rows:
            prev = self.rows[-1]
            hs = [prev["h"], h]
            for i, key in enumerate(("err_triple", "err_2h", "err_l2")):
                r = convergence_rates([prev[key], errors[i]], hs)
                rates[i] = r[0]
        self.rows.append(
            {
                "n": n,
                "h": h,
                "err_triple": errors[0],
                "rate_triple": rates[0],
                "err_2h": errors[1],
                "rate_2h": rates[1],
                "err_l2": errors[2],
                "rate_l2": rates[2],
            }
        )


def convergence_rates(errors, hs):
    """Observed orders log(e_{i-1}/e_i) / log(h_{i-1}/h_i); None if undefined."""
    if len(errors) != len(hs) or len(errors) < 2:
        raise ValueError("need equally many errors and mesh sizes, at least 2")
    rates = []
    for i in range(1, len(errors)):
        if errors[i - 1] <= 0.0 or errors[i] <= 0.0:
            rates.append(None)
        else:
            rates.append(math.log(errors[i - 1] / errors[i]) / math.log(hs[i - 1] / hs[i]))
    return rates


def error_triple(exact: ExactSolution, u_h: WeakFunction, mesh, k, j):
    """Energy-norm error via the projected-Laplacian identity."""
    total = 0.0
    for cell in range(mesh.n_cells):
        op = element_weak_laplacian(mesh, cell, k, j)
        rule = quad_cell(mesh.cell_polygon(cell), cell_rule_degree(j))
        proj = project_cell(exact.laplacian, mesh.cell_polygon(cell), op.basis_j, rule=rule)
        diff = proj - op.matrix @ u_h.local_dofs(mesh, cell)
        total += float(diff @ op.mass @ diff)
    return math.sqrt(max(total, 0.0))


def triple_bar_norm(v: WeakFunction, mesh, k, j):
    """|||v||| for a discrete weak function."""
    total = 0.0
    for cell in range(mesh.n_cells):
        op = element_weak_laplacian(mesh, cell, k, j)
        c = op.matrix @ v.local_dofs(mesh, cell)
        total += float(c @ op.mass @ c)
    return math.sqrt(max(total, 0.0))


def _cell_2h_terms(mesh, cell, k, v0_lap, v0_trace, v0_grad, vb_eval, vn_eval):
    """Shared evaluation of the three ||.||_{2,h} summands on one cell.

    The four callables evaluate the (difference) weak function: Laplacian of
    v0 at cell points, trace and gradient of v0 at edge points, and the
    v_b / v_n edge polynomials at edge points.
    """
    h_t = mesh.cell_diameter[cell]
    rule = quad_cell(mesh.cell_polygon(cell), cell_rule_degree(k + 2))
    lap = v0_lap(rule.points)
    t_lap = float(rule.weights @ (lap * lap))

    t_jump = 0.0
    t_flux = 0.0
    for e, sigma in mesh.cell_edges[cell]:
        p0, p1 = mesh.edge_endpoints(e)
        ebasis = EdgeBasis(k - 1, p0, p1)
        erule = quad_edge(p0, p1, edge_rule_degree(k, k + 2))
        w = erule.weights
        chi = ebasis.values(erule.params)
        n_out = sigma * mesh.edge_normal[e]

        # || Qb(v0 - v_b) ||^2: project the pointwise difference, take the
        # coefficient norm (orthonormal basis).
        g = v0_trace(erule.points) - vb_eval(e, erule)
        coeffs = chi.T @ (w * g)
        t_jump += float(coeffs @ coeffs) / h_t**3

        flux = v0_grad(erule.points) @ n_out - sigma * vn_eval(e, erule)
        t_flux += float(w @ (flux * flux)) / h_t
    return t_lap, t_jump, t_flux


def error_2h(exact: ExactSolution, u_h: WeakFunction, mesh, k):
    """Broken H2 error of v = u - u_h, with analytic traces for u."""
    total = 0.0
    for cell in range(mesh.n_cells):
        basis = CellBasis(k, mesh.cell_centroid[cell], mesh.cell_diameter[cell])
        c0 = u_h.v0[cell]

        def v0_lap(pts):
            return exact.laplacian(pts) - basis.laplacians(pts) @ c0

        def v0_trace(pts):
            return exact.u(pts) - basis.values(pts) @ c0

        def v0_grad(pts):
            return np.asarray(exact.grad(pts)) - basis.gradients(pts).transpose(0, 2, 1) @ c0

        def vb_eval(e, erule):
            p0, p1 = mesh.edge_endpoints(e)
            eb = EdgeBasis(k - 1, p0, p1)
            return exact.u(erule.points) - eb.values(erule.params) @ u_h.vb[e]

        def vn_eval(e, erule):
            p0, p1 = mesh.edge_endpoints(e)
            eb = EdgeBasis(k - 1, p0, p1)
            n_e = mesh.edge_normal[e]
            return (
                np.asarray(exact.grad(erule.points)) @ n_e
                - eb.values(erule.params) @ u_h.vn[e]
            )

        total += sum(_cell_2h_terms(mesh, cell, k, v0_lap, v0_trace, v0_grad,
                                    vb_eval, vn_eval))
    return math.sqrt(max(total, 0.0))


def norm_2h_gram(mesh, k):
    """Per-cell Gram matrices of the ||.||_{2,h} quadratic form.

    Matrices act on local DOF vectors ordered as WeakFunction.local_dofs;
    ||v||_{2,h}^2 = sum over cells of v_loc' N_T v_loc.  Precomputing these
    makes evaluating the norm for many functions cheap.
    """
    from .basis import dim_pk

    grams = []
    dk = dim_pk(k)
    for cell in range(mesh.n_cells):
        basis = CellBasis(k, mesh.cell_centroid[cell], mesh.cell_diameter[cell])
        h_t = mesh.cell_diameter[cell]
        nloc = dk + 2 * k * len(mesh.cell_edges[cell])
        n_t = np.zeros((nloc, nloc))

        rule = quad_cell(mesh.cell_polygon(cell), cell_rule_degree(k + 2))
        lap = basis.laplacians(rule.points)
        n_t[:dk, :dk] = lap.T @ (rule.weights[:, None] * lap)

        col = dk
        for e, sigma in mesh.cell_edges[cell]:
            p0, p1 = mesh.edge_endpoints(e)
            ebasis = EdgeBasis(k - 1, p0, p1)
            erule = quad_edge(p0, p1, edge_rule_degree(k, k + 2))
            w = erule.weights
            chi = ebasis.values(erule.params)
            n_out = sigma * mesh.edge_normal[e]
            vk, gkx, gky, _ = basis.tables(erule.points)

            # Qb(v0) - v_b in the orthonormal edge basis: coefficients are
            # p_e @ c0 - c_b, so the jump term is a small quadratic form.
            p_e = chi.T @ (w[:, None] * vk)            # (k, dk)
            jmap = np.zeros((k, nloc))
            jmap[:, :dk] = p_e
            jmap[:, col:col + k] = -np.eye(k)
            n_t += (jmap.T @ jmap) / h_t**3

            # (grad v0 - v_n n_e) . n sampled at edge quadrature points.
            gphi_n = gkx * n_out[0] + gky * n_out[1]   # (q, dk)
            fmap = np.zeros((len(w), nloc))
            fmap[:, :dk] = gphi_n
            fmap[:, col + k:col + 2 * k] = -sigma * chi
            n_t += (fmap.T @ (w[:, None] * fmap)) / h_t
            col += 2 * k
        grams.append(n_t)
    return grams


def norm_2h(v: WeakFunction, mesh, k, grams=None):
    """||v||_{2,h} for a discrete weak function."""
    if grams is None:
        grams = norm_2h_gram(mesh, k)
    total = 0.0
    for cell in range(mesh.n_cells):
        loc = v.local_dofs(mesh, cell)
        total += float(loc @ grams[cell] @ loc)
    return math.sqrt(max(total, 0.0))


def error_l2(exact: ExactSolution, u_h: WeakFunction, mesh):
    """|| u - u0 ||_{L2} by cell quadrature."""
    k = u_h.k
    total = 0.0
    for cell in range(mesh.n_cells):
        basis = CellBasis(k, mesh.cell_centroid[cell], mesh.cell_diameter[cell])
        rule = quad_cell(mesh.cell_polygon(cell), cell_rule_degree(k + 2))
        diff = exact.u(rule.points) - basis.values(rule.points) @ u_h.v0[cell]
        total += float(rule.weights @ (diff * diff))
    return math.sqrt(max(total, 0.0))
