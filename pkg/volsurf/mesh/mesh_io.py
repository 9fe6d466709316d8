"""
Mesh and field export: VTK legacy ASCII through meshio, and a plain-text
dump of vertices, triangles and boundary chain.
"""

import logging
import os

import meshio
import numpy as np
from hurry.filesize import size

log = logging.getLogger(__name__)


def _points3d(points):
    points = np.asarray(points, dtype=np.float64)
    return np.column_stack([points, np.zeros(len(points))])


def _write(path, points, cell_type, cells, point_data):
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(directory):
        os.makedirs(directory)
    grid = meshio.Mesh(_points3d(points), [(cell_type, np.asarray(cells, dtype=np.int64))],
                       point_data={name: np.asarray(values, dtype=np.float64)
                                   for name, values in (point_data or {}).items()})
    meshio.write(path, grid, file_format='vtk', binary=False)
    log.info("Wrote %s (%s)", path, size(os.path.getsize(path)))
    return path


def write_vtk(mesh, path, point_data=None):
    """
    Write the triangulation as an UNSTRUCTURED_GRID with one scalar field per
    entry of point_data (values on all volume vertices).
    """
    return _write(path, mesh.vertices, 'triangle', mesh.triangles, point_data)


def write_polyline_vtk(mesh, path, vertex_ids, point_data=None, edge_mask=None):
    """
    Write (part of) the boundary chain as a polyline grid.

    :param vertex_ids: boundary vertices carrying the fields, in chain order
    :param edge_mask: boundary edges to include; all edges when omitted
    """
    edges = mesh.boundary_edges if edge_mask is None else mesh.boundary_edges[np.asarray(edge_mask, bool)]
    vertex_ids = np.asarray(vertex_ids, dtype=np.int64)
    local = {int(v): i for i, v in enumerate(vertex_ids)}
    lines = np.array([[local[int(a)], local[int(b)]] for a, b in edges], dtype=np.int64).reshape(-1, 2)
    return _write(path, mesh.vertices[vertex_ids], 'line', lines, point_data)


def dump_text(mesh, path):
    """
    Plain-text mesh dump with 17 significant digits, one section each for
    vertices, triangles and the boundary chain.
    """
    with open(path, 'w') as file_:
        file_.write('vertices %d\n' % mesh.n_vertices)
        for x, y in mesh.vertices:
            file_.write('%.17g %.17g\n' % (x, y))
        file_.write('triangles %d\n' % mesh.n_triangles)
        for a, b, c in mesh.triangles:
            file_.write('%d %d %d\n' % (a, b, c))
        file_.write('boundary %d\n' % mesh.n_boundary_edges)
        for (a, b), marked in zip(mesh.boundary_edges, mesh.gamma2_edge_mask):
            file_.write('%d %d %d\n' % (a, b, int(marked)))
    log.info("Dumped mesh to %s (%s)", path, size(os.path.getsize(path)))
    return path
