import importlib
import inspect
import logging

from .abstract_solver import AbstractSolver

log = logging.getLogger(__name__)

SOLVER_NAMES = ('spd_solver', 'lu_solver')


def create_solver(name, tolerance=1e-12):
    """
    Instantiates the solver implemented in the module of the given name.

    :param name: module name below volsurf.fem.solvers, e.g. 'spd_solver'
    :return: AbstractSolver subclass instance
    """
    if name not in SOLVER_NAMES:
        raise ValueError("unknown solver '%s' (known: %s)" % (name, ', '.join(SOLVER_NAMES)))
    module = importlib.import_module(__name__ + '.' + name)

    # check module for subclasses of AbstractSolver
    for member in inspect.getmembers(module, inspect.isclass):
        if issubclass(member[1], AbstractSolver) and member[0] != 'AbstractSolver':
            log.debug('Solver initialized: %s', name)
            return member[1](tolerance)
    raise ValueError("module '%s' does not define a solver" % name)
