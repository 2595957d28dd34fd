"""P1 finite-element matrices for Steklov / Laplace eigenproblems.

All element integrals are evaluated by the exact affine-element formulas, so
assembly introduces no quadrature error. Same mesh in, bit-identical
matrices out: the COO accumulation is compressed in sorted (row, col) order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DegenerateTriangle, ZeroBoundaryTrace
from .mesh import TriangleMesh, signed_areas

_DEGENERATE_REL_AREA = 1e-14


@dataclass
class FemMatrices:
    """Stiffness, interior mass, and boundary mass in CSR form.

    boundary_index lists the boundary vertex ids in ascending order; the
    boundary mass matrix is supported exactly on those rows/columns.
    """

    stiffness: sparse.csr_matrix
    interior_mass: sparse.csr_matrix
    boundary_mass: sparse.csr_matrix
    boundary_index: np.ndarray

    @property
    def n(self):
        return self.stiffness.shape[0]


def assemble(mesh: TriangleMesh) -> FemMatrices:
    """Assemble stiffness, interior mass, and boundary mass for a mesh."""
    p = mesh.vertices
    t = mesh.triangles
    areas = signed_areas(mesh)
    if np.any(areas < _DEGENERATE_REL_AREA * float(np.mean(areas))):
        raise DegenerateTriangle("triangle area below 1e-14 of the mean")

    # edge vectors opposite each vertex; grad(lambda_i) = rot90(e_i) / (2A)
    e = np.stack([p[t[:, 2]] - p[t[:, 1]],
                  p[t[:, 0]] - p[t[:, 2]],
                  p[t[:, 1]] - p[t[:, 0]]], axis=1)  # (nt, 3, 2)
    # K_ij = (e_i . e_j) / (4A): rotation drops out of the dot product
    k_local = np.einsum("tid,tjd->tij", e, e) / (4.0 * areas)[:, None, None]
    m_local = (areas[:, None, None] / 12.0) * (np.ones((3, 3)) + np.eye(3))

    rows = np.repeat(t, 3, axis=1).ravel()          # i index per 3x3 block
    cols = np.tile(t, (1, 3)).ravel()               # j index per 3x3 block
    n = mesh.nv
    stiffness = sparse.coo_matrix((k_local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    interior_mass = sparse.coo_matrix((m_local.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    be = mesh.boundary_edges
    lens = np.hypot(*(p[be[:, 1]] - p[be[:, 0]]).T)
    b_local = (lens[:, None, None] / 6.0) * (np.ones((2, 2)) + np.eye(2))
    brows = np.repeat(be, 2, axis=1).ravel()
    bcols = np.tile(be, (1, 2)).ravel()
    boundary_mass = sparse.coo_matrix((b_local.ravel(), (brows, bcols)), shape=(n, n)).tocsr()

    return FemMatrices(stiffness, interior_mass, boundary_mass, mesh.boundary_vertices())


def rayleigh_quotient(matrices: FemMatrices, u: np.ndarray) -> float:
    """Discrete Rayleigh quotient u'Ku / u'Bu whose critical values are the
    Steklov eigenvalues."""
    u = np.asarray(u, dtype=float)
    denom = float(u @ (matrices.boundary_mass @ u))
    if denom <= 0.0:
        raise ZeroBoundaryTrace("trial function has zero boundary trace")
    return float(u @ (matrices.stiffness @ u)) / denom
