"""
P1 degrees of freedom and sparse assembly of the volume and curve forms.

Volume forms live on all mesh vertices, curve forms on the boundary chain
(boundary numbering = position in the chain) and on the Γ₂ arc (Γ₂
numbering = marked boundary DOFs in chain order).
"""

import logging
import os

import numpy as np
import scipy.sparse as sps
from scipy.io import mmwrite

from ..exceptions import AssemblyError, DimensionError

log = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-14

TRIANGLE_MASS_PATTERN = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
EDGE_MASS_PATTERN = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
EDGE_STIFFNESS_PATTERN = np.array([[1.0, -1.0], [-1.0, 1.0]])


def triangle_geometry(points):
    """
    :param points: (m, 3, 2) triangle corner coordinates
    :return: (areas, opposite edge vectors of shape (m, 3, 2))
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3, 2)
    e = np.stack([points[:, 2] - points[:, 1],
                  points[:, 0] - points[:, 2],
                  points[:, 1] - points[:, 0]], axis=1)
    areas = 0.5 * (e[:, 2, 0] * (-e[:, 1, 1]) - (-e[:, 1, 0]) * e[:, 2, 1])
    return areas, e


def triangle_stiffness(points):
    """
    Element stiffness (∇φ_i, ∇φ_j)_T = (e_i · e_j) / (4|T|), e_i the edge
    opposite to corner i.

    :param points: (m, 3, 2) or (3, 2)
    :return: (m, 3, 3)
    """
    areas, e = triangle_geometry(points)
    if np.any(areas < DEGENERACY_TOLERANCE):
        raise AssemblyError("degenerate triangle, area %.3e" % areas.min())
    return np.einsum('mik,mjk->mij', e, e) / (4.0 * areas)[:, None, None]


def triangle_mass(points):
    """Element mass (|T|/12)·[[2,1,1],[1,2,1],[1,1,2]], shape (m, 3, 3)."""
    areas, _ = triangle_geometry(points)
    if np.any(areas < DEGENERACY_TOLERANCE):
        raise AssemblyError("degenerate triangle, area %.3e" % areas.min())
    return areas[:, None, None] * TRIANGLE_MASS_PATTERN[None, :, :]


def _edge_lengths(points):
    points = np.asarray(points, dtype=float).reshape(-1, 2, 2)
    lengths = np.hypot(points[:, 1, 0] - points[:, 0, 0], points[:, 1, 1] - points[:, 0, 1])
    if np.any(lengths < DEGENERACY_TOLERANCE):
        raise AssemblyError("degenerate edge, length %.3e" % lengths.min())
    return lengths


def edge_stiffness(points):
    """Tangential stiffness (1/|e|)·[[1,-1],[-1,1]] of straight edges, shape (m, 2, 2)."""
    return EDGE_STIFFNESS_PATTERN[None, :, :] / _edge_lengths(points)[:, None, None]


def edge_mass(points):
    """Edge mass (|e|/6)·[[2,1],[1,2]], shape (m, 2, 2)."""
    return _edge_lengths(points)[:, None, None] * EDGE_MASS_PATTERN[None, :, :]


def _scatter(local, connectivity, n):
    """Sum element matrices into an n x n CSR matrix, elements in input order."""
    k = connectivity.shape[1]
    rows = np.repeat(connectivity, k, axis=1).reshape(-1).astype(np.int64)
    cols = np.tile(connectivity, (1, k)).reshape(-1).astype(np.int64)
    values = local.reshape(-1)
    # stable ordering keeps element order inside every (row, col) sum, so
    # symmetric element matrices give bitwise symmetric results
    order = np.argsort(rows * n + cols, kind='stable')
    keys, start = np.unique((rows * n + cols)[order], return_index=True)
    data = np.add.reduceat(values[order], start) if len(start) else np.zeros(0)
    indptr = np.searchsorted(keys // n, np.arange(n + 1), side='left')
    return sps.csr_matrix((data, keys % n, indptr), shape=(n, n))


def _selection(rows_to_cols, n_cols):
    n_rows = len(rows_to_cols)
    return sps.csr_matrix((np.ones(n_rows), (np.arange(n_rows), np.asarray(rows_to_cols, dtype=np.int64))),
                          shape=(n_rows, n_cols))


class DofMap(object):
    """
    Volume, boundary and Γ₂ degrees of freedom.

    trace (n_boundary x n_volume) picks the boundary nodal values of a volume
    vector, gamma2_embed (n_gamma2 x n_boundary) the Γ₂ values of a boundary
    vector.
    """

    def __init__(self, mesh):
        self.n_volume = mesh.n_vertices
        self.n_boundary = len(mesh.boundary_vertex_ids)
        self.boundary_vertex_ids = mesh.boundary_vertex_ids

        mask = mesh.gamma2_edge_mask
        on_gamma2 = np.zeros(self.n_boundary, dtype=bool)
        marked = np.flatnonzero(mask)
        on_gamma2[marked] = True
        on_gamma2[(marked + 1) % self.n_boundary] = True
        self.gamma2_boundary_ids = np.flatnonzero(on_gamma2)
        self.gamma2_vertex_ids = self.boundary_vertex_ids[self.gamma2_boundary_ids]
        self.n_gamma2 = len(self.gamma2_boundary_ids)

        self.trace = _selection(self.boundary_vertex_ids, self.n_volume)
        self.gamma2_embed = _selection(self.gamma2_boundary_ids, self.n_boundary)

    @property
    def gamma2_trace(self):
        """Composite map volume -> Γ₂."""
        return (self.gamma2_embed @ self.trace).tocsr()

    def size(self, domain):
        return {'volume': self.n_volume, 'boundary': self.n_boundary, 'gamma2': self.n_gamma2}[domain]


class AssembledForms(object):
    """
    Mass and stiffness matrices of the volume, the boundary curve and the Γ₂
    arc, together with the DofMap and the discrete measures.
    """

    def __init__(self, mesh, dofs, M_vol, A_vol, M_bnd, A_bnd, M_g2, A_g2):
        self.mesh = mesh
        self.dofs = dofs
        self.M_vol = M_vol
        self.A_vol = A_vol
        self.M_bnd = M_bnd
        self.A_bnd = A_bnd
        self.M_g2 = M_g2
        self.A_g2 = A_g2
        self.area = float(M_vol.sum())
        self.perimeter = float(M_bnd.sum())
        self.gamma2_length = float(M_g2.sum()) if M_g2.shape[0] else 0.0

    @property
    def trace(self):
        return self.dofs.trace

    def mass(self, domain):
        return {'volume': self.M_vol, 'boundary': self.M_bnd, 'gamma2': self.M_g2}[domain]

    def stiffness(self, domain):
        return {'volume': self.A_vol, 'boundary': self.A_bnd, 'gamma2': self.A_g2}[domain]

    def measure(self, domain):
        return {'volume': self.area, 'boundary': self.perimeter, 'gamma2': self.gamma2_length}[domain]

    def geometry(self):
        return {'area': self.area, 'perimeter': self.perimeter, 'gamma2_length': self.gamma2_length}


def assemble(mesh):
    """
    Assemble every form of the P1 discretization on mesh.

    :param mesh: Mesh2D
    :return: (DofMap, AssembledForms)
    """
    dofs = DofMap(mesh)

    corners = mesh.vertices[mesh.triangles]
    areas, _ = triangle_geometry(corners)
    if np.any(areas < DEGENERACY_TOLERANCE):
        bad = int(np.argmin(areas))
        raise AssemblyError("triangle %d is degenerate (area %.3e)" % (bad, areas[bad]))
    M_vol = _scatter(triangle_mass(corners), mesh.triangles, dofs.n_volume)
    A_vol = _scatter(triangle_stiffness(corners), mesh.triangles, dofs.n_volume)

    nb = dofs.n_boundary
    local_edges = np.stack([np.arange(nb), (np.arange(nb) + 1) % nb], axis=1)
    edge_points = mesh.vertices[mesh.boundary_edges]
    M_bnd = _scatter(edge_mass(edge_points), local_edges, nb)
    A_bnd = _scatter(edge_stiffness(edge_points), local_edges, nb)

    mask = mesh.gamma2_edge_mask
    if mask.any():
        position = -np.ones(nb, dtype=np.int64)
        position[dofs.gamma2_boundary_ids] = np.arange(dofs.n_gamma2)
        g2_edges = position[local_edges[mask]]
        M_g2 = _scatter(edge_mass(edge_points[mask]), g2_edges, dofs.n_gamma2)
        A_g2 = _scatter(edge_stiffness(edge_points[mask]), g2_edges, dofs.n_gamma2)
    else:
        M_g2 = sps.csr_matrix((0, 0))
        A_g2 = sps.csr_matrix((0, 0))

    forms = AssembledForms(mesh, dofs, M_vol, A_vol, M_bnd, A_bnd, M_g2, A_g2)
    log.debug("Assembled forms: %d volume, %d boundary, %d Γ₂ DOFs; |Ω_h|=%.15g |Γ_h|=%.15g |Γ₂,h|=%.15g",
              dofs.n_volume, dofs.n_boundary, dofs.n_gamma2, forms.area, forms.perimeter, forms.gamma2_length)
    return dofs, forms


def quadratic_form(matrix, u, v):
    """
    uᵀ A v.

    :raises DimensionError: on incompatible shapes
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or v.ndim != 1 or matrix.shape != (len(u), len(v)):
        raise DimensionError("quadratic form of a %s matrix with vectors of length %s and %s"
                             % (matrix.shape, u.shape, v.shape))
    return float(u.dot(matrix.dot(v)))


def lumped(matrix):
    """Row-sum diagonal of a mass matrix."""
    return sps.diags(np.asarray(matrix.sum(axis=1)).ravel(), format='csr')


def export_matrix_market(forms, directory):
    """
    Write every assembled matrix in Matrix Market coordinate format.

    :return: list of written paths
    """
    if not os.path.exists(directory):
        os.makedirs(directory)
    written = []
    for name in ('M_vol', 'A_vol', 'M_bnd', 'A_bnd', 'M_g2', 'A_g2'):
        matrix = getattr(forms, name)
        if matrix.shape[0] == 0:
            continue
        path = os.path.join(directory, name + '.mtx')
        mmwrite(path, sps.coo_matrix(matrix), precision=17)
        written.append(path)
    path = os.path.join(directory, 'trace.mtx')
    mmwrite(path, sps.coo_matrix(forms.trace), precision=17)
    written.append(path)
    log.info("Exported %d matrices to %s", len(written), directory)
    return written
