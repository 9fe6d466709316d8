from abc import ABCMeta, abstractmethod
import logging

import numpy as np
import scipy.sparse as sps

from ...exceptions import NumericalError


class AbstractSolver:
    """Abstract class for the sparse direct solvers of the per-step systems.

    A solver is bound to one matrix; the factorization is computed once in
    update() and reused by every solve().
    """

    __metaclass__ = ABCMeta

    max_refinement_sweeps = 5

    @abstractmethod
    def __init__(self, tolerance=1e-12):
        self.name = None
        self.tolerance = tolerance
        self.matrix = None
        self.log = logging.getLogger(__name__)

    def _name(self):
        """Returns the name of the solver."""
        return self.name

    @abstractmethod
    def _factorize(self, matrix):
        """Computes and stores the factorization of matrix (CSC)."""

    @abstractmethod
    def _back_substitute(self, rhs):
        """Applies the stored factorization to rhs."""

    def update(self, matrix):
        """
        Factorizes a new matrix.

        :param matrix: square sparse matrix
        :return: self
        """
        matrix = sps.csc_matrix(matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise NumericalError("matrix of shape %s is not square" % (matrix.shape,))
        self.matrix = matrix
        self._factorize(matrix)
        return self

    def solve(self, rhs):
        """
        Solves matrix x = rhs with iterative refinement until the relative
        residual ||rhs - matrix x|| / ||rhs|| drops below the tolerance.

        :return: (x, relative residual)
        """
        rhs = np.asarray(rhs, dtype=float)
        scale = np.linalg.norm(rhs)
        if scale == 0.0:
            return np.zeros_like(rhs), 0.0

        x = self._back_substitute(rhs)
        residual = rhs - self.matrix.dot(x)
        relative = np.linalg.norm(residual) / scale
        sweeps = 0
        while relative > self.tolerance and sweeps < self.max_refinement_sweeps:
            x = x + self._back_substitute(residual)
            residual = rhs - self.matrix.dot(x)
            relative = np.linalg.norm(residual) / scale
            sweeps += 1

        if not np.isfinite(relative) or relative > self.tolerance:
            raise NumericalError("%s: relative residual %.3e above tolerance %.1e after %d refinement sweeps"
                                 % (self._name(), relative, self.tolerance, sweeps), relative)
        if sweeps:
            self.log.debug("%s: %d refinement sweeps, residual %.3e", self._name(), sweeps, relative)
        return x, relative
