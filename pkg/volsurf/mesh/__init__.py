from .curves import BoundaryCurve, RadialCurve, UnitCircle, curve_from_config
from .disk_mesh import (Mesh2D, MeshQuality, build_disk_mesh, build_mesh_hierarchy, mark_gamma2, quality,
                        refine_to_level, refine_uniform)
from .mesh_io import dump_text, write_polyline_vtk, write_vtk
