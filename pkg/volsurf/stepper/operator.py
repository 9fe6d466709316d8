"""
The per-step linear system of the backward Euler scheme,

    (M/τ + A) u^n = (M/τ) u^{n-1},

row-scaled by the entropy weights so that it becomes symmetric positive
definite whenever the model has a constant (detailed balance) equilibrium.
"""

import logging

import numpy as np
import scipy.sparse as sps
from dotmap import DotMap

from ..fem.solvers import create_solver
from ..models.system import model_for

DEFAULT_OPTIONS = {
    'lumping': False,
    'solver': 'auto',
    'solver_tolerance': 1e-12,
}


class SystemOperator(object):
    """
    Factorized system matrix K = W(M/τ + A) with its ingredients.

    M and A are the (possibly lumped) block mass and reaction-diffusion
    matrices, W the diagonal of operator weights (identity without a
    constant equilibrium). Ms = W M and As = W A are exactly symmetric on the
    symmetric path.
    """

    def __init__(self, forms, model, tau, M, A, weights, K, Ms, As, solver, lumping, symmetric,
                 positivity_guaranteed, exact_mass=None):
        self.log = logging.getLogger(__name__)
        self.forms = forms
        self.model = model
        self.params = model.params
        self.tau = float(tau)
        self.M = M
        self.A = A
        self.weights = weights
        self.K = K
        self.Ms = Ms
        self.As = As
        self.solver = solver
        self.lumping = lumping
        self.symmetric = symmetric
        self.positivity_guaranteed = positivity_guaranteed
        self.exact_mass = exact_mass
        self.exact_geometry = forms.mesh.exact_geometry()
        self.mass_weights = model.mass_weights(forms)

    @property
    def dofs(self):
        return self.forms.dofs

    @property
    def has_reference(self):
        """True when the model has a constant equilibrium to measure entropy against."""
        return self.weights is not None

    def solve(self, rhs):
        return self.solver.solve(rhs)

    def total_mass(self, vector):
        return float(self.mass_weights.dot(vector))

    def get_dict(self):
        return {'model': self.model.name, 'tau': self.tau, 'lumping': self.lumping, 'symmetric': self.symmetric,
                'solver': self.solver.name, 'positivity_guaranteed': self.positivity_guaranteed,
                'n_dofs': int(self.K.shape[0])}


def _symmetrize(matrix):
    return (0.5 * (matrix + matrix.T)).tocsr()


def offdiagonal_max(matrix):
    """Largest off-diagonal entry of a sparse matrix."""
    offdiag = sps.coo_matrix(matrix - sps.diags(matrix.diagonal()))
    return float(offdiag.data.max()) if offdiag.nnz else 0.0


def build_operator(forms, params, tau, options=None, exact_mass=None):
    """
    Assemble and factorize the per-step system.

    :param forms: AssembledForms
    :param params: ModelParams2 or ModelParams4
    :param tau: time step, > 0
    :param options: dict or DotMap with lumping, solver ('auto', 'spd_solver'
        or 'lu_solver') and solver_tolerance
    :param exact_mass: total mass of the initial data on the smooth domain,
        used for the exact-equilibrium entropy
    :raises NotPositiveDefiniteError: if the scaled matrix is not SPD
    """
    log = logging.getLogger(__name__)
    if not tau > 0.0:
        raise ValueError("tau must be > 0 (got %r)" % tau)
    opts = DotMap(DEFAULT_OPTIONS)
    opts.update(DotMap(options or {}))

    model = model_for(params)
    model.check_forms(forms)
    lumping = bool(opts.lumping)
    M = model.mass_block(forms, lumping)
    A = model.reaction_diffusion(forms, lumping)

    species_weights = model.operator_weights()
    if species_weights is not None:
        w = sps.diags(model.weight_vector(species_weights, forms.dofs))
        Ms = _symmetrize(w @ M)
        As = _symmetrize(w @ A)
        K = _symmetrize(Ms / tau + As)
        symmetric = True
    else:
        log.warning("Detailed balance violated (residual %.3e): using the nonsymmetric solve path",
                    params.detailed_balance_residual)
        Ms = M
        As = A
        K = (M / tau + A).tocsr()
        symmetric = False

    solver_name = opts.solver
    if solver_name == 'auto':
        solver_name = 'spd_solver' if symmetric else 'lu_solver'
    solver = create_solver(solver_name, float(opts.solver_tolerance)).update(K)

    positivity = False
    if lumping:
        worst = offdiagonal_max(A)
        positivity = bool(worst <= 1e-14 * abs(A).max())
        if not positivity:
            log.info("Lumped system is not an M-matrix (largest off-diagonal %.3e); positivity is reported only",
                     worst)

    operator = SystemOperator(forms, model, tau, M, A, species_weights, K, Ms, As, solver, lumping, symmetric,
                              positivity, exact_mass)
    log.debug("Built operator: %s", operator.get_dict())
    return operator
