"""
Transfer of P1 functions from a mesh to its uniform refinement.

Old vertices keep their values and interior midpoints take the average of
the parent edge. Boundary midpoints were projected onto the curve, so they
are evaluated at their closest point on the coarse boundary chain (parent
edge or one of its two neighbours).
"""

import logging

import numpy as np

from ..exceptions import DimensionError, ProlongationError
from ..models.entropy import SPECIES_DOMAINS
from ..models.state import StateVector

log = logging.getLogger(__name__)


def _check_pair(coarse_mesh, fine_mesh):
    if fine_mesh.parent is not coarse_mesh or fine_mesh.midpoint_parents is None:
        raise ProlongationError("fine mesh (level %d) is not the uniform refinement of the coarse mesh (level %d)"
                                % (fine_mesh.level, coarse_mesh.level))


def _closest_on_chain(coarse_mesh, fine_mesh, allowed=None):
    """
    For every coarse boundary edge i, the chain positions (a, b) and the
    parameter s with the fine midpoint of edge i closest to
    (1 - s)·x_a + s·x_b on the edges i-1, i, i+1.

    :param allowed: boolean mask of usable coarse boundary edges
    """
    chain = coarse_mesh.boundary_vertex_ids
    nb = len(chain)
    points = coarse_mesh.vertices[chain]
    targets = fine_mesh.vertices[fine_mesh.boundary_vertex_ids[1::2]]
    if allowed is None:
        allowed = np.ones(nb, dtype=bool)

    best_a = np.arange(nb)
    best_s = np.full(nb, 0.5)
    best_d = np.full(nb, np.inf)
    # parent edge first so it wins ties
    for offset in (0, -1, 1):
        edge = (np.arange(nb) + offset) % nb
        p = points[edge]
        q = points[(edge + 1) % nb]
        pq = q - p
        s = np.clip(np.einsum('ij,ij->i', targets - p, pq) / np.einsum('ij,ij->i', pq, pq), 0.0, 1.0)
        d = np.hypot(*(p + s[:, None] * pq - targets).T)
        better = (d < best_d) & allowed[edge]
        best_a = np.where(better, edge, best_a)
        best_s = np.where(better, s, best_s)
        best_d = np.where(better, d, best_d)
    return best_a, (best_a + 1) % nb, best_s


def prolong(coarse_mesh, fine_mesh, coarse_values):
    """
    Evaluate a coarse volume P1 function at the fine vertices.

    :param coarse_values: nodal vector on coarse_mesh
    :return: nodal vector on fine_mesh
    """
    _check_pair(coarse_mesh, fine_mesh)
    values = np.asarray(coarse_values, dtype=float)
    n = coarse_mesh.n_vertices
    if len(values) != n:
        raise DimensionError("coarse vector has %d values, mesh has %d vertices" % (len(values), n))

    parents = fine_mesh.midpoint_parents
    fine = np.empty(fine_mesh.n_vertices)
    fine[:n] = values
    fine[n:] = 0.5 * (values[parents[:, 0]] + values[parents[:, 1]])

    chain = coarse_mesh.boundary_vertex_ids
    a, b, s = _closest_on_chain(coarse_mesh, fine_mesh)
    fine[fine_mesh.boundary_vertex_ids[1::2]] = (1.0 - s) * values[chain[a]] + s * values[chain[b]]
    return fine


def prolong_boundary(coarse_mesh, fine_mesh, coarse_values, allowed=None):
    """Same for a vector on the boundary chain DOFs."""
    _check_pair(coarse_mesh, fine_mesh)
    values = np.asarray(coarse_values, dtype=float)
    nb = coarse_mesh.n_boundary_edges
    if len(values) != nb:
        raise DimensionError("coarse boundary vector has %d values, chain has %d vertices" % (len(values), nb))
    a, b, s = _closest_on_chain(coarse_mesh, fine_mesh, allowed)
    fine = np.empty(2 * nb)
    fine[0::2] = values
    fine[1::2] = (1.0 - s) * values[a] + s * values[b]
    return fine


def prolong_gamma2(coarse_forms, fine_forms, coarse_values):
    """Same for a vector on the Γ₂ DOFs; only marked edges are searched."""
    coarse_mesh = coarse_forms.mesh
    embedded = coarse_forms.dofs.gamma2_embed.T @ np.asarray(coarse_values, dtype=float)
    fine = prolong_boundary(coarse_mesh, fine_forms.mesh, embedded, allowed=coarse_mesh.gamma2_edge_mask)
    return fine_forms.dofs.gamma2_embed @ fine


def prolong_state(coarse_forms, fine_forms, state):
    """
    Prolong every species of a coarse StateVector.

    :return: StateVector on the fine mesh, same time stamp
    """
    coarse_mesh = coarse_forms.mesh
    fine_mesh = fine_forms.mesh
    values = {}
    for name in state.species:
        domain = SPECIES_DOMAINS[name]
        if domain == 'volume':
            values[name] = prolong(coarse_mesh, fine_mesh, state[name])
        elif domain == 'boundary':
            values[name] = prolong_boundary(coarse_mesh, fine_mesh, state[name])
        else:
            values[name] = prolong_gamma2(coarse_forms, fine_forms, state[name])
    log.debug("Prolonged %s from level %d to level %d", ', '.join(state.species), coarse_mesh.level,
              fine_mesh.level)
    return StateVector(values, state.t)
