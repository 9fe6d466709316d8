import numpy as np
from scipy.sparse.linalg import splu

from ...exceptions import NotPositiveDefiniteError
from .abstract_solver import AbstractSolver


class SpdSolver(AbstractSolver):
    """SuperLU in symmetric mode: symmetric fill-reducing ordering and diagonal
    pivots only, so the factorization is an LDLᵀ in disguise and a nonpositive
    pivot proves the matrix is not positive definite.
    """

    def __init__(self, tolerance=1e-12):
        super(SpdSolver, self).__init__(tolerance)
        self.name = "spd_solver"
        self.factor = None

    def _factorize(self, matrix):
        diagonal = matrix.diagonal()
        if np.any(diagonal <= 0.0):
            raise NotPositiveDefiniteError("%s: nonpositive diagonal entry %.3e"
                                           % (self.name, diagonal.min()))
        try:
            self.factor = splu(matrix, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                               options=dict(SymmetricMode=True))
        except RuntimeError as error:
            raise NotPositiveDefiniteError("%s: factorization failed: %s" % (self.name, error))

        if np.array_equal(self.factor.perm_r, self.factor.perm_c):
            pivots = self.factor.U.diagonal()
            if np.any(pivots <= 0.0):
                raise NotPositiveDefiniteError("%s: nonpositive pivot %.3e" % (self.name, pivots.min()))
        else:
            self.log.debug("%s: off-diagonal pivoting happened, pivot sign check skipped", self.name)

    def _back_substitute(self, rhs):
        return self.factor.solve(rhs)
