from scipy.sparse.linalg import splu

from ...exceptions import NumericalError
from .abstract_solver import AbstractSolver


class LuSolver(AbstractSolver):
    """General sparse LU (SuperLU, partial pivoting) for nonsymmetric systems."""

    def __init__(self, tolerance=1e-12):
        super(LuSolver, self).__init__(tolerance)
        self.name = "lu_solver"
        self.factor = None

    def _factorize(self, matrix):
        try:
            self.factor = splu(matrix)
        except RuntimeError as error:
            raise NumericalError("%s: factorization failed: %s" % (self.name, error))

    def _back_substitute(self, rhs):
        return self.factor.solve(rhs)
