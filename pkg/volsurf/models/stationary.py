import logging

import numpy as np
import scipy.sparse as sps

from ..fem.solvers import create_solver

log = logging.getLogger(__name__)


def stationary_solve(forms, model, mass, tolerance=1e-12):
    """
    Discrete equilibrium by brute force: A u = 0 together with the total-mass
    constraint cᵀu = mass, solved as the bordered system

        [ A   c ] [u]   [ 0  ]
        [ cᵀ  0 ] [s] = [mass]

    which is regular because c is not in the range of A (1ᵀA = 0, 1ᵀc > 0)
    and cᵀ does not vanish on the kernel of A.

    :return: StateVector
    """
    model.check_forms(forms)
    A = model.reaction_diffusion(forms)
    c = model.mass_weights(forms)
    column = sps.csr_matrix(c.reshape(-1, 1))
    bordered = sps.bmat([[A, column], [column.T, None]], format='csc')
    rhs = np.zeros(bordered.shape[0])
    rhs[-1] = mass
    solution, residual = create_solver('lu_solver', tolerance).update(bordered).solve(rhs)
    log.debug("Stationary solve: multiplier %.3e, residual %.2e", solution[-1], residual)
    return model.unflatten(solution[:-1], forms.dofs)
