"""Element-local discrete weak Laplacian and the weak-function interpolant.

A weak function is the triple {v0, v_b, v_n n_e}: a P_k polynomial per
cell, and P_{k-1} polynomials per edge for the trace and for the normal
flux, the latter stored relative to the edge's fixed normal n_e.

The weak Laplacian lifts a local weak function into P_j(T) (j > k) through
integration by parts against test polynomials psi:

    (Lw v, psi)_T = (lap v0, psi)_T + <Qb(v0 - v_b), grad psi . n>_bT
                    - <(grad v0 - v_n n_e) . n, psi>_bT

with n the outward normal of T.  Since v_b is already in P_{k-1}(e),
Qb(v0 - v_b) = Qb(v0) - v_b, and (v_n n_e) . n = sigma v_n with
sigma = n_e . n, which is how the edge columns below get their signs.
"""

from dataclasses import dataclass

import numpy as np

from .basis import CellBasis, EdgeBasis, SingularCellError, dim_pk
from .quadrature import quad_cell, quad_edge


def cell_rule_degree(j: int) -> int:
    return 2 * j + 2


def edge_rule_degree(k: int, j: int) -> int:
    return k + j


@dataclass
class WeakFunction:
    """Coefficient arrays of a weak function over a whole mesh."""

    k: int
    v0: np.ndarray  # (n_cells, dim P_k)
    vb: np.ndarray  # (n_edges, k) in the edge's orthonormal basis
    vn: np.ndarray  # (n_edges, k), flux relative to n_e

    def local_dofs(self, mesh, cell: int) -> np.ndarray:
        """Local DOF vector: v0 block, then (v_b, v_n) blocks per edge."""
        parts = [self.v0[cell]]
        for e, _sigma in mesh.cell_edges[cell]:
            parts.append(self.vb[e])
            parts.append(self.vn[e])
        return np.concatenate(parts)


@dataclass
class ElementWeakLaplacian:
    """Matrix form of the weak Laplacian on one cell.

    ``matrix`` maps the local DOF vector (ordered as WeakFunction.local_dofs)
    to P_j(T) coefficients in ``basis_j``; ``mass`` is the P_j Gram matrix,
    so the local stiffness block is matrix.T @ mass @ matrix.
    """

    cell: int
    k: int
    j: int
    matrix: np.ndarray
    basis_j: CellBasis
    mass: np.ndarray


def element_weak_laplacian(mesh, cell: int, k: int, j: int) -> ElementWeakLaplacian:
    if j <= k:
        raise ValueError(f"lifting degree j={j} must exceed k={k}")
    poly = mesh.cell_polygon(cell)
    centroid = mesh.cell_centroid[cell]
    diam = mesh.cell_diameter[cell]
    basis_k = CellBasis(k, centroid, diam)
    basis_j = CellBasis(j, centroid, diam)
    dk, dj = basis_k.dim, basis_j.dim

    rule = quad_cell(poly, cell_rule_degree(j))
    vj = basis_j.values(rule.points)
    wvj = rule.weights[:, None] * vj
    mass_j = vj.T @ wvj
    lap_k = basis_k.laplacians(rule.points)
    # (lap phi_i, psi_m)_T
    r_v0 = wvj.T @ lap_k

    edge_blocks = []
    for e, sigma in mesh.cell_edges[cell]:
        p0, p1 = mesh.edge_endpoints(e)
        ebasis = EdgeBasis(k - 1, p0, p1)
        erule = quad_edge(p0, p1, edge_rule_degree(k, j))
        n_out = sigma * mesh.edge_normal[e]

        chi = ebasis.values(erule.params)           # (q, k)
        w = erule.weights
        vj_e, gjx, gjy, _ = basis_j.tables(erule.points)
        gpsi_n = gjx * n_out[0] + gjy * n_out[1]     # grad psi . n
        vk_e, gkx, gky, _ = basis_k.tables(erule.points)
        gphi_n = gkx * n_out[0] + gky * n_out[1]     # grad phi . n

        b_e = chi.T @ (w[:, None] * gpsi_n)          # <chi, grad psi.n>
        c_e = chi.T @ (w[:, None] * vj_e)            # <chi, psi>
        p_e = chi.T @ (w[:, None] * vk_e)            # Qb coefficients of phi
        g_e = gphi_n.T @ (w[:, None] * vj_e)         # <grad phi.n, psi>

        # v0 columns: + <Qb(phi), grad psi.n> - <grad phi.n, psi>
        r_v0 += b_e.T @ p_e - g_e.T
        # v_b columns: - <chi, grad psi.n>; v_n columns: + sigma <chi, psi>
        edge_blocks.append((-b_e.T, sigma * c_e.T))

    rhs = np.empty((dj, dk + 2 * (k) * len(edge_blocks)))
    rhs[:, :dk] = r_v0
    col = dk
    for vb_block, vn_block in edge_blocks:
        rhs[:, col:col + k] = vb_block
        rhs[:, col + k:col + 2 * k] = vn_block
        col += 2 * k
    try:
        matrix = np.linalg.solve(mass_j, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularCellError(
            f"singular P_{j} mass matrix on cell {cell}: {exc}"
        ) from exc
    return ElementWeakLaplacian(cell, k, j, matrix, basis_j, mass_j)


def apply_weak_laplacian(op: ElementWeakLaplacian, dofs) -> np.ndarray:
    dofs = np.asarray(dofs, dtype=float)
    if dofs.shape != (op.matrix.shape[1],):
        raise ValueError(
            f"expected {op.matrix.shape[1]} local DOFs, got {dofs.shape}"
        )
    return op.matrix @ dofs


def interpolate_qh(u, grad_u, mesh, k: int) -> WeakFunction:
    """Interpolate a smooth field into the weak space.

    v0 = L2 cell projection of u onto P_k; v_b = edge projection of the
    trace; v_n = edge projection of grad u . n_e.
    """
    from .basis import project_cell, project_edge

    v0 = np.empty((mesh.n_cells, dim_pk(k)))
    for i in range(mesh.n_cells):
        basis = CellBasis(k, mesh.cell_centroid[i], mesh.cell_diameter[i])
        rule = quad_cell(mesh.cell_polygon(i), cell_rule_degree(k))
        v0[i] = project_cell(u, mesh.cell_polygon(i), basis, rule=rule)

    vb = np.empty((mesh.n_edges, k))
    vn = np.empty((mesh.n_edges, k))
    for e in range(mesh.n_edges):
        p0, p1 = mesh.edge_endpoints(e)
        ebasis = EdgeBasis(k - 1, p0, p1)
        n_e = mesh.edge_normal[e]
        vb[e] = project_edge(u, ebasis)
        vn[e] = project_edge(lambda pts: np.asarray(grad_u(pts)) @ n_e, ebasis)
    return WeakFunction(k=k, v0=v0, vb=vb, vn=vn)
