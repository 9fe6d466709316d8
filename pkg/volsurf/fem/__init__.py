from .assembly import (AssembledForms, DofMap, assemble, edge_mass, edge_stiffness, export_matrix_market, lumped,
                       quadratic_form, triangle_mass, triangle_stiffness)
from .projection import l2_project, load_vector, quadrature_mass
from .solvers import create_solver
