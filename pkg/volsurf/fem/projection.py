"""
L² projection of pointwise data onto the P1 spaces, with load vectors from
quadrature rules exact for degree-2 integrands: the edge-midpoint rule on
triangles and Simpson's rule on edges.
"""

import logging

import numpy as np

from ..exceptions import NumericalError
from .solvers import create_solver

log = logging.getLogger(__name__)

TARGETS = ('volume', 'boundary', 'gamma2')


def _evaluate(f, points):
    values = np.asarray(f(points[:, 0], points[:, 1]), dtype=float)
    return np.broadcast_to(values, (len(points),))


def _curve_edges(forms, target):
    """Edges of the target curve as (local DOF pairs, endpoint coordinates)."""
    mesh = forms.mesh
    dofs = forms.dofs
    nb = dofs.n_boundary
    local = np.stack([np.arange(nb), (np.arange(nb) + 1) % nb], axis=1)
    points = mesh.vertices[mesh.boundary_edges]
    if target == 'boundary':
        return local, points
    mask = mesh.gamma2_edge_mask
    position = -np.ones(nb, dtype=np.int64)
    position[dofs.gamma2_boundary_ids] = np.arange(dofs.n_gamma2)
    return position[local[mask]], points[mask]


def load_vector(forms, target, f):
    """
    b_i = Q(f φ_i) over the target domain.

    :param target: 'volume', 'boundary' or 'gamma2'
    :param f: callable f(x, y) on numpy arrays
    """
    if target not in TARGETS:
        raise ValueError("unknown projection target '%s'" % target)
    mesh = forms.mesh
    n = forms.dofs.size(target)
    b = np.zeros(n)

    if target == 'volume':
        tri = mesh.triangles
        p = mesh.vertices[tri]
        areas = forms.mesh.signed_areas()
        f01 = _evaluate(f, 0.5 * (p[:, 0] + p[:, 1]))
        f12 = _evaluate(f, 0.5 * (p[:, 1] + p[:, 2]))
        f20 = _evaluate(f, 0.5 * (p[:, 2] + p[:, 0]))
        w = areas / 3.0
        np.add.at(b, tri[:, 0], w * 0.5 * (f01 + f20))
        np.add.at(b, tri[:, 1], w * 0.5 * (f01 + f12))
        np.add.at(b, tri[:, 2], w * 0.5 * (f12 + f20))
        return b

    local, points = _curve_edges(forms, target)
    lengths = np.hypot(points[:, 1, 0] - points[:, 0, 0], points[:, 1, 1] - points[:, 0, 1])
    fa = _evaluate(f, points[:, 0])
    fm = _evaluate(f, 0.5 * (points[:, 0] + points[:, 1]))
    fb = _evaluate(f, points[:, 1])
    np.add.at(b, local[:, 0], lengths / 6.0 * fa + lengths / 3.0 * fm)
    np.add.at(b, local[:, 1], lengths / 6.0 * fb + lengths / 3.0 * fm)
    return b


def quadrature_mass(forms, target, f):
    """Degree-2 quadrature of f over the target domain."""
    return float(np.sum(load_vector(forms, target, f)))


def l2_project(forms, target, f, tolerance=1e-12):
    """
    Solve M u = b for the nodal coefficients of the L² projection of f.

    :raises NumericalError: when the mass solve misses the tolerance
    """
    b = load_vector(forms, target, f)
    if len(b) == 0:
        return b
    solver = create_solver('spd_solver', tolerance).update(forms.mass(target))
    try:
        u, residual = solver.solve(b)
    except NumericalError as error:
        log.error("L² projection onto %s failed: %s", target, error)
        raise
    log.debug("L² projection onto %s: %d DOFs, residual %.2e", target, len(u), residual)
    return u
