"""
Everything one run needs, built from a RunConfig: mesh, forms, parameters,
initial state and the factorized operator.
"""

import logging

from .fem.assembly import assemble
from .mesh.disk_mesh import build_mesh_hierarchy, quality
from .models.initial_data import exact_mass
from .models.system import model_for
from .stepper.operator import build_operator
from .stepper.time_stepper import TimeGrid, initial_state, run


def mesh_hierarchy(config, finest_level):
    """Meshes of levels 0..finest_level for the configured ring mesh, curve and Γ₂."""
    mesh = config.section('mesh')
    return build_mesh_hierarchy(mesh['rings'], finest_level, config.curve(), config.gamma2())


class Simulation(object):
    """
    One discretized run.

    :param config: RunConfig
    :param level: refinement level, default mesh.refinements
    :param tau: step size, default time.tau
    :param t_final: final time, default time.t_final
    :param mesh: ready mesh of the requested level, built when omitted
    :param initial_data: dict species -> f(x, y) replacing the configured data
    """

    def __init__(self, config, level=None, tau=None, t_final=None, mesh=None, initial_data=None):
        self.log = logging.getLogger(__name__)
        self.config = config
        time = config.section('time')
        self.options = config.section('options')
        self.level = config.section('mesh')['refinements'] if level is None else int(level)
        self.tau = float(time['tau'] if tau is None else tau)
        self.t_final = float(time['t_final'] if t_final is None else t_final)

        self.params = config.params()
        self.model = model_for(self.params)
        self.mesh = mesh if mesh is not None else mesh_hierarchy(config, self.level)[-1]
        self.mesh.validate()
        self.dofs, self.forms = assemble(self.mesh)
        self.data = initial_data if initial_data is not None else config.initial_data(self.model)

        self.exact_mass = None
        if self.model.has_constant_equilibrium:
            self.exact_mass = exact_mass(self.mesh.curve, self.data, self.mesh.gamma2_arc())
        self.grid = TimeGrid.from_final_time(self.tau, self.t_final)
        self.operator = build_operator(self.forms, self.params, self.tau, self.options, self.exact_mass)
        self.state0 = initial_state(self.forms, self.data)
        self.log.info("Prepared %s run on level %d (%d vertices), %r", self.model.name, self.level,
                      self.mesh.n_vertices, self.grid)

    def run(self, pipelines=None):
        """:return: TrajectorySummary"""
        return run(self.operator, self.state0, self.grid, pipelines)

    def geometry_report(self):
        report = {
            'level': self.level,
            'curve': self.mesh.curve.name,
            'discrete': self.forms.geometry(),
            'exact': self.mesh.exact_geometry(),
            'quality': quality(self.mesh).get_dict(),
            'vertices': self.mesh.n_vertices,
            'triangles': self.mesh.n_triangles,
            'boundary_edges': self.mesh.n_boundary_edges,
            'gamma2_edges': int(self.mesh.gamma2_edge_mask.sum()),
        }
        return report

    def equilibria(self):
        """Exact and discrete equilibria, or None without a constant equilibrium."""
        if not self.model.has_constant_equilibrium:
            return None
        mass_h = self.model.total_mass(self.forms, self.state0)
        return {
            'initial_mass_discrete': mass_h,
            'initial_mass_exact': self.exact_mass,
            'discrete': self.model.discrete_equilibrium(self.forms, mass_h).get_dict(),
            'exact': self.model.equilibrium(self.mesh.exact_geometry(), self.exact_mass).get_dict(),
        }
