"""
Exceptions raised by volsurf. Everything derives from VolSurfError so the
command line front end can turn any of them into a nonzero exit status.
"""


class VolSurfError(Exception):
    """Base class of all volsurf errors."""


class ConfigError(VolSurfError):
    """Invalid run configuration. The message names the offending field."""


class MeshError(VolSurfError):
    """Structurally invalid or degenerate triangulation."""


class AssemblyError(VolSurfError):
    """Degenerate element met during assembly."""


class DimensionError(VolSurfError, ValueError):
    """Vectors or matrices of incompatible shape."""


class ModelError(VolSurfError):
    """Invalid model parameters, unknown builtin or detailed-balance violation."""


class NumericalError(VolSurfError):
    """A linear solve did not reach the requested residual."""

    def __init__(self, message, residual=None):
        super(NumericalError, self).__init__(message)
        self.residual = residual


class NotPositiveDefiniteError(NumericalError):
    """Factorization of a matrix expected to be SPD failed or met a nonpositive pivot."""


class SpectralGapError(NumericalError):
    """Eigen-iteration did not converge; carries the residual history."""

    def __init__(self, message, history=None):
        history = list(history or [])
        super(SpectralGapError, self).__init__(message, history[-1] if history else None)
        self.history = history


class ProlongationError(VolSurfError):
    """Meshes handed to prolong are not parent and child."""


class FitError(VolSurfError):
    """Entropy series unsuitable for a decay fit."""


class InvariantViolation(VolSurfError):
    """A runtime conservation or entropy check failed."""

    def __init__(self, name, message):
        super(InvariantViolation, self).__init__('%s: %s' % (name, message))
        self.name = name

    def __reduce__(self):
        return InvariantViolation, (self.name, str(self).split(': ', 1)[-1])
