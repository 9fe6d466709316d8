# Step pipelines. Every StepItem of a run passes the configured stages in
# order; each stage gets open_run(run) before the first item and
# close_run(run) after the last one (also when the run fails).
import logging
import math
import os.path

import pandas as pd
from hurry.filesize import size

from ..exceptions import InvariantViolation
from ..mesh.mesh_io import write_polyline_vtk, write_vtk
from ..models.entropy import SPECIES_DOMAINS
from ..stepper.time_stepper import StepDiagnostics


class InMemoryStorage(object):
    """
    Keeps the diagnostics of every step (and optionally the states).
    """

    def __init__(self, keep_states=False):
        self.keep_states = keep_states
        self.diagnostics = []
        self.states = []

    def open_run(self, run):
        self.diagnostics = []
        self.states = []

    def process_item(self, item, run):
        self.diagnostics.append(item.diagnostics)
        if self.keep_states:
            self.states.append(item.state)
        return item

    def close_run(self, run):
        pass

    def frame(self):
        return pd.DataFrame([d.get_dict() for d in self.diagnostics])

    def series(self, column):
        return [getattr(d, column) for d in self.diagnostics]


class InvariantCheck(object):
    """
    Checks mass conservation, the per-step entropy identity, entropy
    monotonicity and (where the lumped system guarantees it) positivity.

    With strict=True the first failure raises InvariantViolation, otherwise
    failures are collected in run.summary.failures.
    """

    def __init__(self, mass_tolerance=1e-9, identity_tolerance=1e-10, strict=True):
        self.log = logging.getLogger(__name__)
        self.mass_tolerance = mass_tolerance
        self.identity_tolerance = identity_tolerance
        self.strict = strict
        self.initial = None
        self.failures = []

    def open_run(self, run):
        self.initial = None
        self.failures = []

    def _fail(self, run, name, message):
        if self.strict:
            self.log.error("Invariant %s violated: %s", name, message)
            run.summary.failures.append({'name': name, 'message': message})
            raise InvariantViolation(name, message)
        if name not in [failure['name'] for failure in self.failures]:
            self.log.warning("Invariant %s violated: %s", name, message)
            failure = {'name': name, 'message': message}
            self.failures.append(failure)
            run.summary.failures.append(failure)

    def process_item(self, item, run):
        d = item.diagnostics
        if self.initial is None:
            self.initial = d
            return item

        mass0 = self.initial.mass
        drift = abs(d.mass - mass0)
        if drift > self.mass_tolerance * max(abs(mass0), 1e-300):
            self._fail(run, 'mass_conservation', "step %d: |M(t_n) - M(0)| = %.3e exceeds %.1e relative"
                       % (d.n, drift, self.mass_tolerance))

        if not math.isnan(d.identity_residual):
            if d.identity_residual > self.identity_tolerance:
                self._fail(run, 'entropy_identity', "step %d: relative residual %.3e exceeds %.1e"
                           % (d.n, d.identity_residual, self.identity_tolerance))
            if d.E_disc > d.E_previous * (1.0 + self.identity_tolerance):
                self._fail(run, 'entropy_monotonicity', "step %d: E increased from %.17g to %.17g"
                           % (d.n, d.E_previous, d.E_disc))

        if (run.operator.positivity_guaranteed and self.initial.min_value >= 0.0
                and d.min_value < -1e-12 * max(1.0, abs(mass0))):
            self._fail(run, 'positivity', "step %d: minimum nodal value %.3e" % (d.n, d.min_value))
        return item

    def close_run(self, run):
        if self.failures:
            self.log.warning("%d invariant(s) violated: %s", len(self.failures),
                             ', '.join(f['name'] for f in self.failures))


class CsvSeriesStorage(object):
    """
    Writes the per-step diagnostics to a CSV file with the columns of
    StepDiagnostics, 17 significant digits and Unix newlines.
    """

    def __init__(self, path):
        self.log = logging.getLogger(__name__)
        self.path = path
        self.rows = []

    def open_run(self, run):
        directory = os.path.dirname(os.path.abspath(self.path))
        if not os.path.exists(directory):
            os.makedirs(directory)
        self.rows = []

    def process_item(self, item, run):
        self.rows.append(item.diagnostics.row())
        return item

    def close_run(self, run):
        frame = pd.DataFrame(self.rows, columns=list(StepDiagnostics.columns))
        frame['n'] = frame['n'].astype(int)
        frame.to_csv(self.path, index=False, float_format='%.17g', lineterminator='\n')
        self.log.info("Wrote %s (%d rows, %s)", self.path, len(frame), size(os.path.getsize(self.path)))


class VtkSnapshotStorage(object):
    """
    Writes VTK snapshots every `every` steps (0: never) and at the steps
    closest to each of `times`: volume species on the triangulation, ℓ on
    the boundary polyline, p on the Γ₂ polyline.
    """

    def __init__(self, directory, every=0, times=()):
        self.log = logging.getLogger(__name__)
        self.directory = directory
        self.every = int(every)
        self.times = sorted(float(t) for t in times)
        self.files = []
        self.pending = []

    def open_run(self, run):
        if not os.path.exists(self.directory):
            os.makedirs(self.directory)
        self.files = []
        self.pending = [t for t in self.times if t <= run.grid.t_final + 0.5 * run.grid.tau]
        unreachable = len(self.times) - len(self.pending)
        if unreachable:
            self.log.warning("%d snapshot time(s) lie beyond t_final=%g", unreachable, run.grid.t_final)

    def _due(self, item, run):
        due = self.every > 0 and item.n % self.every == 0
        half = 0.5 * run.grid.tau
        matched = [t for t in self.pending if abs(item.t - t) <= half]
        for t in matched:
            self.pending.remove(t)
        return due or bool(matched)

    def process_item(self, item, run):
        if self._due(item, run):
            self.files.extend(self.write(item.state, run.operator.forms, item.n))
            run.summary.snapshot_steps.append(item.n)
        return item

    def write(self, state, forms, n):
        written = write_state_vtk(state, forms, os.path.join(self.directory, 'snapshot_%06d' % n))
        self.log.debug("Snapshot of step %d: %d files", n, len(written))
        return written

    def close_run(self, run):
        if self.pending:
            self.log.warning("No step matched snapshot time(s) %s", ', '.join('%g' % t for t in self.pending))


def write_state_vtk(state, forms, prefix):
    """
    Write a state as <prefix>_volume.vtk (volume species), <prefix>_surface.vtk
    (ℓ on the boundary polyline) and <prefix>_gamma2.vtk (p on the Γ₂ arc).

    :return: list of written paths
    """
    mesh = forms.mesh
    dofs = forms.dofs
    written = []
    volume = dict((name, state[name]) for name in state.species if SPECIES_DOMAINS[name] == 'volume')
    if volume:
        written.append(write_vtk(mesh, prefix + '_volume.vtk', volume))
    if 'ell' in state:
        written.append(write_polyline_vtk(mesh, prefix + '_surface.vtk', dofs.boundary_vertex_ids,
                                          {'ell': state['ell']}))
    if 'p' in state:
        written.append(write_polyline_vtk(mesh, prefix + '_gamma2.vtk', dofs.gamma2_vertex_ids,
                                          {'p': state['p']}, edge_mask=mesh.gamma2_edge_mask))
    return written
