"""
Backward Euler stepping of M u' + A u = 0.

With a constant equilibrium the step is taken for the deviation
e = u - u∞_h from the discrete equilibrium of the state's mass,

    K e^n = (1/τ) W M e^{n-1},   u^n = u∞_h + e^n,

so the entropy bookkeeping keeps full relative precision down to the
machine floor of the equilibrium.
"""

import datetime
import logging
import math

import numpy as np
from ago import human

from ..exceptions import DimensionError
from ..fem.projection import l2_project
from ..models.entropy import SPECIES_DOMAINS
from ..models.state import StateVector

log = logging.getLogger(__name__)

NAN = float('nan')


class TimeGrid(object):
    """Uniform grid t_n = n·τ, n = 0..n_steps."""

    def __init__(self, tau, n_steps):
        if not tau > 0.0:
            raise ValueError("tau must be > 0 (got %r)" % tau)
        if int(n_steps) != n_steps or n_steps < 0:
            raise ValueError("n_steps must be a nonnegative integer (got %r)" % n_steps)
        self.tau = float(tau)
        self.n_steps = int(n_steps)

    @classmethod
    def from_final_time(cls, tau, t_final):
        n_steps = int(round(t_final / tau))
        if abs(n_steps * tau - t_final) > 1e-9 * max(1.0, t_final):
            log.warning("t_final=%g is not a multiple of tau=%g; stopping at %g", t_final, tau, n_steps * tau)
        return cls(tau, n_steps)

    def time(self, n):
        return n * self.tau

    @property
    def t_final(self):
        return self.time(self.n_steps)

    def __repr__(self):
        return 'TimeGrid(tau=%g, n_steps=%d)' % (self.tau, self.n_steps)


class StepDiagnostics(object):
    """
    Scalars reported after every step. E_disc, E_exact, D and
    increment_energy are NaN for systems without a constant equilibrium.
    """

    columns = ('n', 't', 'mass', 'E_disc', 'E_exact', 'D', 'increment_energy', 'residual')

    def __init__(self, n, t, mass, E_disc, E_exact, D, increment_energy, residual, min_value,
                 identity_residual=0.0, E_previous=NAN):
        self.n = int(n)
        self.t = float(t)
        self.mass = float(mass)
        self.E_disc = float(E_disc)
        self.E_exact = float(E_exact)
        self.D = float(D)
        self.increment_energy = float(increment_energy)
        self.residual = float(residual)
        self.min_value = float(min_value)
        self.identity_residual = float(identity_residual)
        self.E_previous = float(E_previous)

    @property
    def linear_residual(self):
        return self.residual

    def row(self):
        return [getattr(self, column) for column in self.columns]

    def get_dict(self):
        values = dict(zip(self.columns, self.row()))
        values['min_value'] = self.min_value
        values['identity_residual'] = self.identity_residual
        return values

    def __repr__(self):
        return ('StepDiagnostics(n=%d, t=%g, mass=%.17g, E_disc=%.6e, D=%.6e)'
                % (self.n, self.t, self.mass, self.E_disc, self.D))


class StepItem(object):
    """What a step hands to the pipeline stages."""

    def __init__(self, n, state, diagnostics):
        self.n = n
        self.state = state
        self.diagnostics = diagnostics

    @property
    def t(self):
        return self.diagnostics.t


class TrajectorySummary(object):
    """Running aggregate of a trajectory's diagnostics."""

    def __init__(self, operator, grid, initial):
        self.operator = operator
        self.grid = grid
        self.initial = initial
        self.final = initial
        self.n_steps = 0
        self.max_mass_drift = 0.0
        self.max_identity_residual = 0.0
        self.max_linear_residual = 0.0
        self.entropy_nonincreasing = True
        self.min_value = initial.min_value
        self.positivity_guaranteed = operator.positivity_guaranteed
        self.snapshot_steps = []
        self.failures = []
        self.final_state = None

    def record(self, diagnostics):
        mass0 = self.initial.mass
        drift = abs(diagnostics.mass - mass0) / (abs(mass0) if mass0 else 1.0)
        self.max_mass_drift = max(self.max_mass_drift, drift)
        self.max_linear_residual = max(self.max_linear_residual, diagnostics.residual)
        if not math.isnan(diagnostics.identity_residual):
            self.max_identity_residual = max(self.max_identity_residual, diagnostics.identity_residual)
        if diagnostics.E_disc > self.final.E_disc:
            self.entropy_nonincreasing = False
        self.min_value = min(self.min_value, diagnostics.min_value)
        self.final = diagnostics
        self.n_steps = diagnostics.n

    @property
    def positivity_observed(self):
        return self.initial.min_value < 0.0 or self.min_value >= 0.0

    def get_dict(self):
        return {
            'n_steps': self.n_steps,
            'initial': self.initial.get_dict(),
            'final': self.final.get_dict(),
            'max_mass_drift': self.max_mass_drift,
            'max_identity_residual': self.max_identity_residual,
            'max_linear_residual': self.max_linear_residual,
            'entropy_nonincreasing': self.entropy_nonincreasing,
            'positivity_guaranteed': self.positivity_guaranteed,
            'positivity_observed': self.positivity_observed,
            'snapshot_steps': list(self.snapshot_steps),
            'failures': list(self.failures),
        }


class RunContext(object):
    """Shared by all pipeline stages of one run."""

    def __init__(self, operator, grid, summary):
        self.operator = operator
        self.grid = grid
        self.summary = summary
        self.log = logging.getLogger(__name__)


def initial_state(forms, data, t=0.0):
    """
    L²-projection of every species of the initial data.

    :param forms: AssembledForms
    :param data: dict species name -> f(x, y)
    """
    values = {}
    for name, f in data.items():
        if name not in SPECIES_DOMAINS:
            raise DimensionError("unknown species '%s'" % name)
        values[name] = l2_project(forms, SPECIES_DOMAINS[name], f)
    return StateVector(values, t)


def _references(op, mass):
    """Discrete and exact equilibrium vectors with the entropy weight vectors."""
    model = op.model
    discrete = model.discrete_equilibrium(op.forms, mass)
    exact = model.equilibrium(op.exact_geometry, op.exact_mass if op.exact_mass is not None else mass)
    return (model.equilibrium_vector(discrete, op.dofs),
            model.weight_vector(model.entropy_weights(discrete), op.dofs),
            model.equilibrium_vector(exact, op.dofs),
            model.weight_vector(model.entropy_weights(exact), op.dofs))


def _entropy(op, w, e):
    return 0.5 * float(np.dot(w * e, op.M.dot(e)))


def _dissipation(op, w, e):
    return float(np.dot(w * e, op.A.dot(e)))


def evaluate(op, state, n=0, previous=None, residual=0.0):
    """
    Diagnostics of state; previous is the deviation before the step that
    produced it (None for the initial row).
    """
    u = op.model.flatten(state)
    mass = op.total_mass(u)
    if not op.has_reference:
        return StepDiagnostics(n, n * op.tau, mass, NAN, NAN, NAN, NAN, residual, state.min_value(), NAN)

    ref, w, ref_exact, w_exact = _references(op, mass)
    e = state.deviation if state.deviation is not None else u - ref
    E = _entropy(op, w, e)
    D = _dissipation(op, w, e)
    E_exact = _entropy(op, w_exact, e + (ref - ref_exact))
    if previous is None:
        return StepDiagnostics(n, n * op.tau, mass, E, E_exact, D, 0.0, residual, state.min_value())

    E_old = _entropy(op, w, previous)
    increment = _entropy(op, w, e - previous)
    scale = E_old + increment + op.tau * D
    defect = abs(E - E_old + increment + op.tau * D)
    identity = defect / scale if scale > 0.0 else defect
    return StepDiagnostics(n, n * op.tau, mass, E, E_exact, D, increment, residual, state.min_value(), identity,
                           E_old)


def step(op, state, n=None):
    """
    One backward Euler step.

    :param op: SystemOperator built on the state's forms
    :param state: StateVector at t_{n-1}
    :param n: index of the new time level, default from state.t
    :return: (StateVector at t_n, StepDiagnostics)
    :raises NumericalError: if the solver misses its tolerance
    """
    model = op.model
    state.check(model, op.dofs)
    if n is None:
        n = int(round(state.t / op.tau)) + 1
    u = model.flatten(state)

    if op.has_reference:
        mass = op.total_mass(u)
        ref = model.equilibrium_vector(model.discrete_equilibrium(op.forms, mass), op.dofs)
        previous = state.deviation if state.deviation is not None else u - ref
        e, residual = op.solve(op.Ms.dot(previous) / op.tau)
        new_state = model.unflatten(ref + e, op.dofs, n * op.tau)
        new_state.deviation = e
    else:
        previous = None
        u_new, residual = op.solve(op.M.dot(u) / op.tau)
        new_state = model.unflatten(u_new, op.dofs, n * op.tau)

    return new_state, evaluate(op, new_state, n, previous, residual)


def run(op, state0, grid, sink=None):
    """
    Iterate step over the grid and stream every StepItem through the
    pipeline stages of sink.

    :param sink: ordered stages with open_run / process_item / close_run
    :return: TrajectorySummary
    """
    if abs(grid.tau - op.tau) > 1e-15 * op.tau:
        raise ValueError("grid tau %g differs from operator tau %g" % (grid.tau, op.tau))
    state0.check(op.model, op.dofs)
    stages = list(sink or [])
    start = datetime.datetime.now()

    diagnostics = evaluate(op, state0, 0)
    summary = TrajectorySummary(op, grid, diagnostics)
    context = RunContext(op, grid, summary)
    for stage in stages:
        stage.open_run(context)

    def emit(item):
        for stage in stages:
            item = stage.process_item(item, context)

    try:
        summary.final_state = state0
        emit(StepItem(0, state0, diagnostics))
        state = state0
        report_every = max(1, grid.n_steps // 10)
        for n in range(1, grid.n_steps + 1):
            state, diagnostics = step(op, state, n)
            summary.record(diagnostics)
            summary.final_state = state
            emit(StepItem(n, state, diagnostics))
            if n % report_every == 0:
                log.info("Step %d/%d (t=%g), E_disc=%.3e, started %s", n, grid.n_steps, diagnostics.t,
                         diagnostics.E_disc, human(start, precision=1))
    finally:
        for stage in stages:
            stage.close_run(context)

    log.info("Finished %d steps: mass drift %.2e, identity residual %.2e", summary.n_steps,
             summary.max_mass_drift, summary.max_identity_residual)
    return summary
