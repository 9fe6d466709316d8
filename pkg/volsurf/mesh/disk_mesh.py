"""
Triangulations of star-shaped smooth domains: structured ring meshes, uniform
red refinement with boundary projection, Γ₂ arc marking and shape-regularity
reports.

Meshes are immutable: all arrays are read-only and every operation returns a
new Mesh2D.
"""

import logging
import math

import numpy as np

from ..exceptions import MeshError
from .curves import UnitCircle

log = logging.getLogger(__name__)

CURVE_TOLERANCE = 1e-12


def _frozen(array, dtype):
    array = np.ascontiguousarray(array, dtype=dtype)
    array.setflags(write=False)
    return array


def _signed_areas(vertices, triangles):
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))


def unique_edges(triangles, n_vertices):
    """
    Sorted unique undirected edges of a triangulation.

    :return: (edges, triangle_to_edge) where edges is (n_edges, 2) with
        edges[:, 0] < edges[:, 1], sorted lexicographically, and
        triangle_to_edge[t] holds the edge indices of (v0v1, v1v2, v2v0)
    """
    local = triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    lo = np.minimum(local[:, 0], local[:, 1]).astype(np.int64)
    hi = np.maximum(local[:, 0], local[:, 1]).astype(np.int64)
    keys, inverse = np.unique(lo * n_vertices + hi, return_inverse=True)
    edges = np.stack([keys // n_vertices, keys % n_vertices], axis=1)
    return edges, inverse.reshape(-1, 3)


class MeshQuality(object):
    """Shape-regularity report of a triangulation."""

    def __init__(self, min_angle, max_ratio, h, n_triangles, n_boundary_edges):
        self.min_angle = min_angle
        self.max_ratio = max_ratio
        self.h = h
        self.n_triangles = n_triangles
        self.n_boundary_edges = n_boundary_edges

    def get_dict(self):
        return {'min_angle': self.min_angle, 'max_ratio': self.max_ratio, 'h': self.h,
                'n_triangles': self.n_triangles, 'n_boundary_edges': self.n_boundary_edges}

    def __repr__(self):
        return ('MeshQuality(min_angle=%.3f, max_ratio=%.4f, h=%.5g, n_triangles=%d, n_boundary_edges=%d)'
                % (self.min_angle, self.max_ratio, self.h, self.n_triangles, self.n_boundary_edges))


class Mesh2D(object):
    """
    Polygonal approximation Ω_h of a smooth domain.

    boundary_edges[i] joins boundary_vertex_ids[i] and
    boundary_vertex_ids[(i + 1) % n]; the chain runs counterclockwise.
    midpoint_parents is set on refined meshes only: vertex
    ``n_parent_vertices + i`` is the midpoint of edge midpoint_parents[i].
    """

    vertices = None
    triangles = None
    boundary_edges = None
    boundary_vertex_ids = None
    gamma2_edge_mask = None
    level = 0
    curve = None
    parent = None
    midpoint_parents = None
    gamma2_interval = None

    def __init__(self, vertices, triangles, boundary_vertex_ids, gamma2_edge_mask=None, level=0,
                 curve=None, parent=None, midpoint_parents=None, gamma2_interval=None):
        self.vertices = _frozen(vertices, np.float64)
        self.triangles = _frozen(triangles, np.int64)
        self.boundary_vertex_ids = _frozen(boundary_vertex_ids, np.int64)
        self.boundary_edges = _frozen(np.stack([self.boundary_vertex_ids,
                                                np.roll(self.boundary_vertex_ids, -1)], axis=1), np.int64)
        if gamma2_edge_mask is None:
            gamma2_edge_mask = np.zeros(len(self.boundary_vertex_ids), dtype=bool)
        self.gamma2_edge_mask = _frozen(gamma2_edge_mask, bool)
        self.level = int(level)
        self.curve = curve if curve is not None else UnitCircle()
        self.parent = parent
        self.midpoint_parents = None if midpoint_parents is None else _frozen(midpoint_parents, np.int64)
        self.gamma2_interval = gamma2_interval

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_boundary_edges(self):
        return len(self.boundary_edges)

    def signed_areas(self):
        return _signed_areas(self.vertices, self.triangles)

    def boundary_edge_lengths(self):
        diff = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.hypot(diff[:, 0], diff[:, 1])

    def area(self):
        """|Ω_h|, the sum of triangle areas."""
        return float(np.sum(self.signed_areas()))

    def perimeter(self):
        """|Γ_h|"""
        return float(np.sum(self.boundary_edge_lengths()))

    def gamma2_length(self):
        """|Γ₂,h|"""
        return float(np.sum(self.boundary_edge_lengths()[self.gamma2_edge_mask]))

    def shoelace_area(self):
        p = self.vertices[self.boundary_vertex_ids]
        q = np.roll(p, -1, axis=0)
        return float(0.5 * np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))

    def edges(self):
        return unique_edges(self.triangles, self.n_vertices)[0]

    def gamma2_arc(self):
        """
        Angles (start, end) of the marked arc's end vertices, end > start,
        or None without marking.
        """
        mask = self.gamma2_edge_mask
        if not mask.any():
            return None
        first = int(np.flatnonzero(mask & ~np.roll(mask, 1))[0])
        count = int(mask.sum())
        nb = self.n_boundary_edges
        start = self.vertices[self.boundary_vertex_ids[first]]
        end = self.vertices[self.boundary_vertex_ids[(first + count) % nb]]
        theta_start = math.atan2(start[1], start[0])
        theta_end = math.atan2(end[1], end[0])
        while theta_end <= theta_start:
            theta_end += 2.0 * math.pi
        return theta_start, theta_end

    def exact_geometry(self):
        """Measures of the smooth domain the mesh approximates."""
        arc = self.gamma2_arc()
        return {'area': self.curve.exact_area(),
                'perimeter': self.curve.exact_length(),
                'gamma2_length': self.curve.exact_length(*arc) if arc else 0.0}

    def geometry(self):
        return {'area': self.area(), 'perimeter': self.perimeter(), 'gamma2_length': self.gamma2_length()}

    def derive_boundary_chain(self):
        """
        Boundary chain re-derived from the triangle topology.

        :return: boundary vertex ids in counterclockwise order, starting at
            the first vertex of the stored chain
        """
        directed = self.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2).astype(np.int64)
        n = self.n_vertices
        keys = directed[:, 0] * n + directed[:, 1]
        reverse = directed[:, 1] * n + directed[:, 0]
        if len(np.unique(keys)) != len(keys):
            raise MeshError("directed edge used twice; triangles are not consistently oriented")
        on_boundary = ~np.isin(reverse, keys)
        successor = {}
        for a, b in directed[on_boundary]:
            if a in successor:
                raise MeshError("boundary is not a simple polygon at vertex %d" % a)
            successor[int(a)] = int(b)

        start = int(self.boundary_vertex_ids[0]) if len(self.boundary_vertex_ids) else min(successor)
        if start not in successor:
            raise MeshError("stored chain starts at interior vertex %d" % start)
        chain = [start]
        while True:
            nxt = successor.get(chain[-1])
            if nxt is None:
                raise MeshError("boundary chain breaks off at vertex %d" % chain[-1])
            if nxt == start:
                break
            if len(chain) > len(successor):
                raise MeshError("boundary chain does not close")
            chain.append(nxt)
        if len(chain) != len(successor):
            raise MeshError("boundary consists of %d vertices but the chain through vertex %d has only %d"
                            % (len(successor), start, len(chain)))
        return np.asarray(chain, dtype=np.int64)

    def validate(self):
        """
        Check every structural invariant; raises MeshError on the first violation.
        """
        areas = self.signed_areas()
        if np.any(areas <= 0.0):
            bad = int(np.argmin(areas))
            raise MeshError("triangle %d has nonpositive signed area %.3e" % (bad, areas[bad]))
        derived = self.derive_boundary_chain()
        if not np.array_equal(derived, self.boundary_vertex_ids):
            raise MeshError("stored boundary chain differs from the chain derived from the triangles")
        distance = self.curve.distance(self.vertices[self.boundary_vertex_ids])
        if distance.size and distance.max() > CURVE_TOLERANCE:
            raise MeshError("boundary vertex off the curve by %.3e" % distance.max())
        if self.gamma2_edge_mask.any():
            transitions = np.count_nonzero(self.gamma2_edge_mask != np.roll(self.gamma2_edge_mask, 1))
            if transitions > 2:
                raise MeshError("Γ₂ marking is not a single connected arc (%d transitions)" % transitions)
        return self

    def __repr__(self):
        return ('Mesh2D(level=%d, vertices=%d, triangles=%d, boundary_edges=%d, gamma2_edges=%d)'
                % (self.level, self.n_vertices, self.n_triangles, self.n_boundary_edges,
                   int(self.gamma2_edge_mask.sum())))


def build_disk_mesh(rings, curve=None):
    """
    Structured concentric-ring triangulation. Ring k (1..rings) carries 6k
    vertices at relative radius k/rings; ring k-1 and ring k are joined
    sector by sector, which gives 6·rings² triangles.

    :param rings: number of rings, >= 1
    :param curve: BoundaryCurve, the unit circle by default
    :return: Mesh2D of level 0
    """
    if int(rings) != rings or rings < 1:
        raise MeshError("rings must be a positive integer (got %r)" % (rings,))
    rings = int(rings)
    curve = curve if curve is not None else UnitCircle()

    vertices = [np.zeros((1, 2))]
    for k in range(1, rings + 1):
        theta = 2.0 * math.pi * np.arange(6 * k) / (6 * k)
        if k == rings:
            ring = curve.point(theta)
        else:
            ring = (float(k) / rings) * curve.point(theta)
        vertices.append(ring)
    vertices = np.concatenate(vertices, axis=0)

    def index(k, j):
        if k == 0:
            return 0
        return 1 + 3 * k * (k - 1) + (j % (6 * k))

    triangles = []
    for k in range(1, rings + 1):
        for s in range(6):
            for i in range(k):
                inner_i = index(k - 1, s * (k - 1) + i)
                triangles.append((inner_i, index(k, s * k + i), index(k, s * k + i + 1)))
            for i in range(k - 1):
                inner_i = index(k - 1, s * (k - 1) + i)
                inner_next = index(k - 1, s * (k - 1) + i + 1)
                triangles.append((inner_i, index(k, s * k + i + 1), inner_next))
    triangles = np.asarray(triangles, dtype=np.int64)
    boundary = np.asarray([index(rings, j) for j in range(6 * rings)], dtype=np.int64)

    mesh = Mesh2D(vertices, triangles, boundary, level=0, curve=curve)
    if np.any(mesh.signed_areas() <= 0.0):
        raise MeshError("ring construction produced a degenerate triangle; the curve is too far from a circle")
    log.debug("Built ring mesh: %r", mesh)
    return mesh


def refine_uniform(mesh):
    """
    Split every triangle into four by its edge midpoints. Midpoints of
    boundary edges are projected radially onto the curve; existing vertices
    keep their indices and new vertices follow in sorted edge order.

    :param mesh: Mesh2D
    :return: Mesh2D of level mesh.level + 1 with parent=mesh
    """
    n = mesh.n_vertices
    edges, tri_to_edge = unique_edges(mesh.triangles, n)
    midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])

    b = mesh.boundary_edges.astype(np.int64)
    lo = np.minimum(b[:, 0], b[:, 1])
    hi = np.maximum(b[:, 0], b[:, 1])
    edge_keys = edges[:, 0] * n + edges[:, 1]
    boundary_edge_index = np.searchsorted(edge_keys, lo * n + hi)
    if np.any(edge_keys[boundary_edge_index] != lo * n + hi):
        raise MeshError("boundary edge not found among triangle edges")

    midpoints[boundary_edge_index] = mesh.curve.project(midpoints[boundary_edge_index])
    vertices = np.concatenate([mesh.vertices, midpoints], axis=0)

    t = mesh.triangles
    m01 = n + tri_to_edge[:, 0]
    m12 = n + tri_to_edge[:, 1]
    m20 = n + tri_to_edge[:, 2]
    children = np.stack([
        np.stack([t[:, 0], m01, m20], axis=1),
        np.stack([m01, t[:, 1], m12], axis=1),
        np.stack([m20, m12, t[:, 2]], axis=1),
        np.stack([m01, m12, m20], axis=1),
    ], axis=1).reshape(-1, 3)

    areas = _signed_areas(vertices, children)
    if np.any(areas <= 0.0):
        bad = int(np.argmin(areas))
        raise MeshError("refinement produced child triangle %d with signed area %.3e" % (bad, areas[bad]))

    chain = np.stack([mesh.boundary_vertex_ids, n + boundary_edge_index], axis=1).reshape(-1)
    refined = Mesh2D(vertices, children, chain,
                     gamma2_edge_mask=np.repeat(mesh.gamma2_edge_mask, 2),
                     level=mesh.level + 1, curve=mesh.curve, parent=mesh,
                     midpoint_parents=edges, gamma2_interval=mesh.gamma2_interval)
    log.debug("Refined mesh: %r", refined)
    return refined


def mark_gamma2(mesh, theta_min, theta_max):
    """
    Mark the boundary edges whose midpoint angle lies in [theta_min, theta_max].

    :return: new Mesh2D carrying the marking
    """
    span = float(theta_max) - float(theta_min)
    if not 0.0 <= span < 2.0 * math.pi:
        raise MeshError("Γ₂ interval must satisfy 0 <= theta_max - theta_min < 2π (got %.6g)" % span)
    mids = 0.5 * (mesh.vertices[mesh.boundary_edges[:, 0]] + mesh.vertices[mesh.boundary_edges[:, 1]])
    phi = np.arctan2(mids[:, 1], mids[:, 0])
    mask = np.mod(phi - float(theta_min), 2.0 * math.pi) <= span
    if not mask.any():
        raise MeshError("Γ₂ interval [%.6g, %.6g] marks no boundary edge" % (theta_min, theta_max))
    if mask.all():
        raise MeshError("Γ₂ interval [%.6g, %.6g] marks the whole boundary" % (theta_min, theta_max))
    transitions = np.count_nonzero(mask != np.roll(mask, 1))
    if transitions != 2:
        raise MeshError("Γ₂ marking is not a connected arc")

    marked = Mesh2D(mesh.vertices, mesh.triangles, mesh.boundary_vertex_ids, gamma2_edge_mask=mask,
                    level=mesh.level, curve=mesh.curve, parent=mesh.parent,
                    midpoint_parents=mesh.midpoint_parents,
                    gamma2_interval=(float(theta_min), float(theta_max)))
    log.debug("Marked %d of %d boundary edges as Γ₂", int(mask.sum()), len(mask))
    return marked


def quality(mesh):
    """
    Shape-regularity report: smallest interior angle, largest h_T/ρ_T with
    ρ_T the inscribed-circle diameter, and the mesh size h = max h_T.
    """
    p = mesh.vertices[mesh.triangles]
    a = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
    b = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
    c = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    area = mesh.signed_areas()
    perimeter = a + b + c
    h_t = np.maximum(np.maximum(a, b), c)
    rho_t = 4.0 * area / perimeter

    cos_a = np.clip((b ** 2 + c ** 2 - a ** 2) / (2.0 * b * c), -1.0, 1.0)
    cos_b = np.clip((a ** 2 + c ** 2 - b ** 2) / (2.0 * a * c), -1.0, 1.0)
    cos_c = np.clip((a ** 2 + b ** 2 - c ** 2) / (2.0 * a * b), -1.0, 1.0)
    angles = np.degrees(np.arccos(np.stack([cos_a, cos_b, cos_c], axis=1)))

    return MeshQuality(min_angle=float(angles.min()),
                       max_ratio=float(np.max(h_t / rho_t)),
                       h=float(h_t.max()),
                       n_triangles=mesh.n_triangles,
                       n_boundary_edges=mesh.n_boundary_edges)


def build_mesh_hierarchy(rings, levels, curve=None, gamma2=None):
    """
    Mesh sequence of levels 0..levels by repeated uniform refinement.

    :param gamma2: optional (theta_min, theta_max); the marking is applied to
        the coarsest mesh and inherited
    :return: list of Mesh2D
    """
    mesh = build_disk_mesh(rings, curve)
    if gamma2 is not None:
        mesh = mark_gamma2(mesh, gamma2[0], gamma2[1])
    hierarchy = [mesh]
    for _ in range(int(levels)):
        hierarchy.append(refine_uniform(hierarchy[-1]))
    return hierarchy


def refine_to_level(mesh, level):
    """Refine mesh until it reaches the given level."""
    while mesh.level < level:
        mesh = refine_uniform(mesh)
    return mesh
