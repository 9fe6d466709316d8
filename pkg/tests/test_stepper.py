import math

import numpy as np
import pytest
import scipy.linalg

from volsurf.exceptions import DimensionError
from volsurf.expressions import parse_expression
from volsurf.models.initial_data import builtin_initial_data, exact_mass
from volsurf.models.state import StateVector
from volsurf.models.system import model_for
from volsurf.stepper.operator import build_operator
from volsurf.stepper.time_stepper import StepDiagnostics, TimeGrid, evaluate, initial_state, run, step


class Recorder(object):
    """Pipeline stage keeping every item."""

    def __init__(self):
        self.items = []
        self.opened = self.closed = 0

    def open_run(self, run):
        self.opened += 1

    def process_item(self, item, run):
        self.items.append(item)
        return item

    def close_run(self, run):
        self.closed += 1


def builtin_state(forms, name):
    return initial_state(forms, builtin_initial_data(name))


def test_operator_is_exactly_symmetric(marked_forms, params2, params4):
    for params in (params2, params4):
        op = build_operator(marked_forms, params, 0.01)
        assert op.symmetric
        assert op.solver.name == 'spd_solver'
        for matrix in (op.K, op.Ms, op.As):
            assert abs(matrix - matrix.T).max() == 0.0


def test_operator_matches_dense_construction(hexagon_forms, params2):
    tau = 0.05
    op = build_operator(hexagon_forms, params2, tau)
    model = model_for(params2)
    W = np.diag(model.weight_vector([params2.lam, params2.gamma], hexagon_forms.dofs))
    M = model.mass_block(hexagon_forms).toarray()
    A = model.reaction_diffusion(hexagon_forms).toarray()
    dense = W @ (M / tau + A)
    assert np.max(np.abs(op.K.toarray() - dense)) <= 1e-14 * np.max(np.abs(dense))
    assert scipy.linalg.eigvalsh(op.K.toarray())[0] > 0.0


def test_equilibrium_direction_is_in_the_kernel(forms, params2):
    op = build_operator(forms, params2, 0.1)
    dofs = forms.dofs
    kernel = np.concatenate([np.full(dofs.n_volume, params2.gamma), np.full(dofs.n_boundary, params2.lam)])
    assert np.max(np.abs(op.As.dot(kernel))) <= 1e-12 * abs(op.As).max() * params2.lam
    assert np.max(np.abs(op.A.dot(kernel))) <= 1e-12 * abs(op.A).max() * params2.lam


def test_tau_must_be_positive(forms, params2):
    with pytest.raises(ValueError):
        build_operator(forms, params2, 0.0)


def test_equilibrium_is_a_fixed_point(marked_forms, params2, params4):
    for params in (params2, params4):
        model = model_for(params)
        eq = model.discrete_equilibrium(marked_forms, 4.0)
        u = model.equilibrium_vector(eq, marked_forms.dofs)
        state = model.unflatten(u, marked_forms.dofs)
        op = build_operator(marked_forms, params, 0.1)
        new_state, diagnostics = step(op, state, 1)
        assert np.allclose(model.flatten(new_state), u, rtol=0.0, atol=1e-13)
        assert diagnostics.E_disc <= 1e-28
        assert new_state.t == pytest.approx(0.1)


def test_single_step_identity(forms, params2):
    op = build_operator(forms, params2, 0.05)
    state0 = builtin_state(forms, 'paper-2species')
    state1, d = step(op, state0)
    assert d.n == 1
    total = op.total_mass(op.model.flatten(state0))
    assert d.mass == pytest.approx(total, rel=1e-13)
    assert d.E_disc < d.E_previous
    defect = d.E_disc - d.E_previous + d.increment_energy + op.tau * d.D
    assert abs(defect) <= 1e-10 * d.E_previous
    assert d.identity_residual <= 1e-10
    assert d.residual <= 1e-12
    assert total > 0.0


@pytest.mark.parametrize('name, data', [
    ('two', 'paper-2species'),
    ('four', 'paper-4species'),
])
def test_long_run_conserves_mass_and_dissipates(marked_forms, params2, params4, name, data):
    params = params2 if name == 'two' else params4
    op = build_operator(marked_forms, params, 0.01)
    recorder = Recorder()
    summary = run(op, builtin_state(marked_forms, data), TimeGrid(0.01, 1000), [recorder])
    assert summary.n_steps == 1000
    assert len(recorder.items) == 1001
    assert recorder.opened == recorder.closed == 1
    assert summary.max_mass_drift <= 1e-9
    assert summary.max_identity_residual <= 1e-10
    assert summary.entropy_nonincreasing
    energies = [item.diagnostics.E_disc for item in recorder.items]
    assert all(later <= earlier * (1.0 + 1e-10) for earlier, later in zip(energies, energies[1:]))
    assert energies[-1] < energies[0]
    assert summary.final.t == pytest.approx(10.0)


def test_zero_step_run(forms, params2):
    op = build_operator(forms, params2, 0.1)
    state0 = builtin_state(forms, 'paper-2species')
    recorder = Recorder()
    summary = run(op, state0, TimeGrid(0.1, 0), [recorder])
    assert summary.n_steps == 0
    assert summary.final_state is state0
    assert len(recorder.items) == 1
    assert recorder.items[0].diagnostics.increment_energy == 0.0


def test_run_rejects_other_tau(forms, params2):
    op = build_operator(forms, params2, 0.1)
    with pytest.raises(ValueError):
        run(op, builtin_state(forms, 'paper-2species'), TimeGrid(0.05, 4))


def test_step_checks_dimensions(forms, hexagon_forms, params2):
    op = build_operator(forms, params2, 0.1)
    with pytest.raises(DimensionError):
        step(op, builtin_state(hexagon_forms, 'paper-2species'))


def test_unbalanced_four_species_uses_lu(marked_forms, unbalanced_params4):
    op = build_operator(marked_forms, unbalanced_params4, 0.05)
    assert not op.symmetric
    assert not op.has_reference
    assert op.solver.name == 'lu_solver'
    summary = run(op, builtin_state(marked_forms, 'paper-4species'), TimeGrid(0.05, 40))
    assert summary.max_mass_drift <= 1e-12
    assert math.isnan(summary.final.E_disc)
    assert math.isnan(summary.final.D)
    assert math.isnan(summary.final.identity_residual)
    assert summary.entropy_nonincreasing


def test_lumping_guarantees_positivity_on_hexagon(hexagon_forms, params2):
    op = build_operator(hexagon_forms, params2, 0.1, {'lumping': True})
    assert op.lumping
    assert op.positivity_guaranteed
    data = {'L': parse_expression('1.5 + x'), 'ell': parse_expression('0.5')}
    summary = run(op, initial_state(hexagon_forms, data), TimeGrid(0.1, 50))
    assert summary.min_value >= 0.0
    assert summary.positivity_observed
    assert summary.max_mass_drift <= 1e-12
    assert summary.get_dict()['positivity_guaranteed'] is True


def test_consistent_mass_reports_positivity_unknown(forms, params2):
    assert not build_operator(forms, params2, 0.1).positivity_guaranteed


def test_exact_entropy_uses_exact_mass(marked_mesh, marked_forms, params2):
    data = builtin_initial_data('paper-2species')
    mass = exact_mass(marked_mesh.curve, data)
    op = build_operator(marked_forms, params2, 0.1, exact_mass=mass)
    d = evaluate(op, initial_state(marked_forms, data))
    assert d.E_exact > 0.0
    assert d.E_exact != d.E_disc


def test_initial_state_projects_constants(marked_forms):
    data = builtin_initial_data('paper-4species')
    state = initial_state(marked_forms, data)
    assert set(state.species) == {'L', 'P', 'ell', 'p'}
    assert len(state['p']) == marked_forms.dofs.n_gamma2
    with pytest.raises(DimensionError):
        initial_state(marked_forms, {'Q': data['L']})
    with pytest.raises(ValueError):
        state['L'][0] = 1.0


def test_time_grid():
    grid = TimeGrid.from_final_time(0.1, 1.0)
    assert grid.n_steps == 10
    assert grid.t_final == pytest.approx(1.0)
    assert grid.time(3) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(0.1, -1)
    assert TimeGrid.from_final_time(0.3, 1.0).n_steps == 3


def test_step_diagnostics_row():
    d = StepDiagnostics(2, 0.2, 1.0, 0.5, 0.6, 0.1, 0.01, 1e-15, 0.0)
    assert d.row() == [2, 0.2, 1.0, 0.5, 0.6, 0.1, 0.01, 1e-15]
    assert d.get_dict()['min_value'] == 0.0
    assert len(StepDiagnostics.columns) == 8


def test_state_vector_is_read_only():
    state = StateVector({'L': [1.0, 2.0]}, t=0.5)
    assert state.min_value() == 1.0
    assert state.get_dict() == {'t': 0.5, 'values': {'L': [1.0, 2.0]}}
