"""Global DOF numbering, SPD assembly, and the sparse solve.

Numbering: cell-interior DOFs first (cell-major, basis-minor), then v_b
DOFs of interior edges, then v_n DOFs of interior edges.  Boundary-edge
v_b/v_n DOFs are constrained: zero for the clamped problem, or the edge
projections of supplied boundary data (given relative to the fixed edge
normal n_e), and their stiffness columns are moved to the right-hand side.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import CellBasis, EdgeBasis, dim_pk, project_edge
from .quadrature import quad_cell
from .weakop import WeakFunction, cell_rule_degree, element_weak_laplacian

DIRECT_SOLVE_LIMIT = 200_000


class SolverError(RuntimeError):
    pass


@dataclass
class DofMap:
    k: int
    n_cells: int
    n_edges: int
    interior_pos: np.ndarray  # (n_edges,) position among interior edges, -1 if boundary
    n_interior: int
    vb_values: np.ndarray     # (n_edges, k) constrained values (boundary rows)
    vn_values: np.ndarray

    @property
    def dim_k(self):
        return dim_pk(self.k)

    @property
    def n_free(self):
        return self.n_cells * self.dim_k + 2 * self.k * self.n_interior

    @property
    def n_total(self):
        return self.n_cells * self.dim_k + 2 * self.k * self.n_edges

    def vb_base(self, e):
        p = self.interior_pos[e]
        return -1 if p < 0 else self.n_cells * self.dim_k + p * self.k

    def vn_base(self, e):
        p = self.interior_pos[e]
        if p < 0:
            return -1
        return self.n_cells * self.dim_k + (self.n_interior + p) * self.k

    def cell_dofs(self, mesh, cell):
        """(global indices, constrained values) for the cell's local DOFs.

        Index -1 marks a constrained DOF; its value is in the second array.
        """
        k, dk = self.k, self.dim_k
        nloc = dk + 2 * k * len(mesh.cell_edges[cell])
        idx = np.full(nloc, -1, dtype=np.intp)
        vals = np.zeros(nloc)
        idx[:dk] = cell * dk + np.arange(dk)
        pos = dk
        for e, _sigma in mesh.cell_edges[cell]:
            vb = self.vb_base(e)
            if vb >= 0:
                idx[pos:pos + k] = vb + np.arange(k)
                idx[pos + k:pos + 2 * k] = self.vn_base(e) + np.arange(k)
            else:
                vals[pos:pos + k] = self.vb_values[e]
                vals[pos + k:pos + 2 * k] = self.vn_values[e]
            pos += 2 * k
        return idx, vals


def build_dof_map(mesh, k, g_d=None, g_n=None) -> DofMap:
    """Number free DOFs and project boundary data onto constrained ones.

    ``g_d`` is the trace of the solution, ``g_n`` its derivative along the
    fixed edge normal n_e; both default to zero (clamped plate).
    """
    interior_pos = np.full(mesh.n_edges, -1, dtype=np.intp)
    pos = 0
    for e in range(mesh.n_edges):
        if not mesh.edge_boundary[e]:
            interior_pos[e] = pos
            pos += 1

    vb_values = np.zeros((mesh.n_edges, k))
    vn_values = np.zeros((mesh.n_edges, k))
    if g_d is not None or g_n is not None:
        for e in range(mesh.n_edges):
            if not mesh.edge_boundary[e]:
                continue
            p0, p1 = mesh.edge_endpoints(e)
            ebasis = EdgeBasis(k - 1, p0, p1)
            if g_d is not None:
                vb_values[e] = project_edge(g_d, ebasis)
            if g_n is not None:
                n_e = mesh.edge_normal[e]
                vn_values[e] = project_edge(
                    lambda pts: np.asarray(g_n(pts)) @ n_e, ebasis
                )
    return DofMap(
        k=k,
        n_cells=mesh.n_cells,
        n_edges=mesh.n_edges,
        interior_pos=interior_pos,
        n_interior=pos,
        vb_values=vb_values,
        vn_values=vn_values,
    )


@dataclass
class LinearSystem:
    """Reduced sparse system over free DOFs; boundary data already in b."""

    A: sp.csr_matrix
    b: np.ndarray


def assemble(mesh, k, j, f, dofmap: DofMap) -> LinearSystem:
    """Stiffness (Lw., Lw.) and load (f, v0) over free DOFs.

    Cells are processed in fixed index order, so the result is
    bit-reproducible.
    """
    n = dofmap.n_free
    rows, cols, vals = [], [], []
    b = np.zeros(n)

    for cell in range(mesh.n_cells):
        op = element_weak_laplacian(mesh, cell, k, j)
        ke = op.matrix.T @ op.mass @ op.matrix
        idx, cvals = dofmap.cell_dofs(mesh, cell)
        free = idx >= 0

        fi = idx[free]
        kf = ke[np.ix_(free, free)]
        rows.append(np.repeat(fi, len(fi)))
        cols.append(np.tile(fi, len(fi)))
        vals.append(kf.ravel())
        if not free.all():
            b[fi] -= ke[np.ix_(free, ~free)] @ cvals[~free]

        # Load: (f, phi_i)_T on the v0 block only.
        basis_k = CellBasis(k, mesh.cell_centroid[cell], mesh.cell_diameter[cell])
        rule = quad_cell(mesh.cell_polygon(cell), cell_rule_degree(j))
        fv = np.asarray(f(rule.points), dtype=float)
        b[idx[:dofmap.dim_k]] += basis_k.values(rule.points).T @ (rule.weights * fv)

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    return LinearSystem(A=A, b=b)


def backward_error(system: LinearSystem, x) -> float:
    """Normwise backward error ||Ax - b|| / (||A|| ||x|| + ||b||)."""
    r = float(np.linalg.norm(system.A @ x - system.b))
    anorm = float(abs(system.A).sum(axis=0).max())
    return r / (anorm * float(np.linalg.norm(x)) + float(np.linalg.norm(system.b)))


def solve(system: LinearSystem, tol: float = 1e-12) -> np.ndarray:
    """Solve the reduced SPD system to a normwise backward error of ``tol``.

    Direct sparse factorization below DIRECT_SOLVE_LIMIT free DOFs,
    diagonally preconditioned conjugate gradients above.  The system is
    symmetrically equilibrated and the factorization polished by iterative
    refinement: the biharmonic stiffness is too ill conditioned for a single
    factor-solve, and a residual measured against ||b|| alone has a floor of
    eps * ||A|| ||x|| / ||b||, which grows like h^-4.
    """
    n = system.A.shape[0]
    bnorm = float(np.linalg.norm(system.b))
    if bnorm == 0.0:
        return np.zeros(n)

    d = system.A.diagonal()
    if np.any(d <= 0.0):
        raise SolverError("non-positive diagonal entry; matrix not SPD")
    s = np.sqrt(d)
    a_s = (sp.diags(1.0 / s) @ system.A @ sp.diags(1.0 / s)).tocsc()
    b_s = system.b / s
    bs_norm = float(np.linalg.norm(b_s))

    if n <= DIRECT_SOLVE_LIMIT:
        try:
            lu = spla.splu(a_s)
            y = lu.solve(b_s)
        except RuntimeError as exc:
            raise SolverError(f"sparse factorization failed: {exc}") from exc
        for _ in range(10):
            r = b_s - a_s @ y
            if np.linalg.norm(r) <= 0.1 * tol * bs_norm:
                break
            y = y + lu.solve(r)
    else:
        precond = spla.LinearOperator((n, n), matvec=lambda v: v)
        y, info = spla.cg(
            a_s, b_s, rtol=max(tol, 1e-14), atol=0.0,
            maxiter=100 * int(np.sqrt(n) + 1000), M=precond,
        )
        if info != 0:
            res = float(np.linalg.norm(a_s @ y - b_s)) / bs_norm
            raise SolverError(
                f"conjugate gradients did not converge (info={info}, "
                f"relative residual {res:.3e})"
            )

    x = y / s
    err = backward_error(system, x)
    if err > tol:
        raise SolverError(f"backward error {err:.3e} exceeds tolerance {tol:.3e}")
    return x


def weak_function_from_free(dofmap: DofMap, x: np.ndarray) -> WeakFunction:
    """Expand a free-DOF vector into a WeakFunction, filling constrained DOFs."""
    k, dk = dofmap.k, dofmap.dim_k
    v0 = x[: dofmap.n_cells * dk].reshape(dofmap.n_cells, dk).copy()
    vb = dofmap.vb_values.copy()
    vn = dofmap.vn_values.copy()
    for e in range(dofmap.n_edges):
        base = dofmap.vb_base(e)
        if base >= 0:
            vb[e] = x[base:base + k]
            vnb = dofmap.vn_base(e)
            vn[e] = x[vnb:vnb + k]
    return WeakFunction(k=k, v0=v0, vb=vb, vn=vn)


def solve_biharmonic(mesh, k, j, f, boundary=None, tol=1e-12) -> WeakFunction:
    """End-to-end solve: DOF map, assembly, sparse solve, expansion.

    ``boundary`` is an optional (g_d, g_n) pair; g_n is the solution's
    derivative along the fixed edge normals n_e.
    """
    g_d, g_n = boundary if boundary is not None else (None, None)
    dofmap = build_dof_map(mesh, k, g_d=g_d, g_n=g_n)
    system = assemble(mesh, k, j, f, dofmap)
    x = solve(system, tol=tol)
    return weak_function_from_free(dofmap, x)
