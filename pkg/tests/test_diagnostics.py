import math

import numpy as np
import pandas as pd
import pytest

from volsurf.config import RunConfig
from volsurf.diagnostics.convergence import (EocTable, eoc, grid_difference_norms, h_convergence_study,
                                             tau_convergence_study)
from volsurf.diagnostics.decay import decay_fit, decay_study, discrete_decay_rate, floor_ratios
from volsurf.diagnostics.prolongation import prolong, prolong_boundary, prolong_gamma2, prolong_state
from volsurf.diagnostics.spectral import dense_spectral_gap, gap_study, poincare_constant, spectral_gap
from volsurf.exceptions import ConfigError, DimensionError, FitError, ModelError, ProlongationError
from volsurf.fem.assembly import assemble
from volsurf.mesh.disk_mesh import build_mesh_hierarchy, mark_gamma2, refine_uniform
from volsurf.models.entropy import entropy
from volsurf.models.initial_data import builtin_initial_data
from volsurf.models.state import StateVector
from volsurf.models.system import model_for
from volsurf.stepper.operator import build_operator
from volsurf.stepper.time_stepper import TimeGrid, initial_state, run


@pytest.fixture
def pair(marked_mesh):
    fine = refine_uniform(marked_mesh)
    return assemble(marked_mesh)[1], assemble(fine)[1]


def test_prolongation_is_exact_for_linear_functions(pair):
    coarse, fine = pair
    x = coarse.mesh.vertices
    values = 2.0 * x[:, 0] - x[:, 1] + 0.5
    fine_values = prolong(coarse.mesh, fine.mesh, values)
    interior = np.setdiff1d(np.arange(fine.mesh.n_vertices), fine.mesh.boundary_vertex_ids)
    y = fine.mesh.vertices
    assert np.allclose(fine_values[interior], 2.0 * y[interior, 0] - y[interior, 1] + 0.5, rtol=0, atol=1e-13)
    assert np.array_equal(fine_values[:coarse.mesh.n_vertices], values)


def test_prolongation_keeps_constants(pair):
    coarse, fine = pair
    state = StateVector({'L': np.full(coarse.dofs.n_volume, 2.0), 'P': np.full(coarse.dofs.n_volume, 1.0),
                         'ell': np.full(coarse.dofs.n_boundary, 3.0), 'p': np.full(coarse.dofs.n_gamma2, 4.0)},
                        t=1.5)
    fine_state = prolong_state(coarse, fine, state)
    assert fine_state.t == 1.5
    for name, value in (('L', 2.0), ('P', 1.0), ('ell', 3.0), ('p', 4.0)):
        assert np.allclose(fine_state[name], value, rtol=0.0, atol=1e-14)
    assert len(fine_state['p']) == fine.dofs.n_gamma2
    boundary = prolong_boundary(coarse.mesh, fine.mesh, np.arange(coarse.dofs.n_boundary, dtype=float))
    assert np.array_equal(boundary[0::2], np.arange(coarse.dofs.n_boundary))
    gamma2 = prolong_gamma2(coarse, fine, np.full(coarse.dofs.n_gamma2, 4.0))
    assert np.allclose(gamma2, 4.0, rtol=0.0, atol=1e-14)


def test_prolongation_needs_parent(pair, hexagon):
    coarse, fine = pair
    with pytest.raises(ProlongationError):
        prolong(hexagon, fine.mesh, np.zeros(hexagon.n_vertices))
    with pytest.raises(ProlongationError):
        prolong(refine_uniform(coarse.mesh), fine.mesh, np.zeros(fine.mesh.n_vertices))
    with pytest.raises(DimensionError):
        prolong(coarse.mesh, fine.mesh, np.zeros(3))


def test_difference_norms(forms):
    n, nb = forms.dofs.n_volume, forms.dofs.n_boundary
    zero = grid_difference_norms(forms, StateVector({'L': np.ones(n), 'ell': np.ones(nb)}),
                                 StateVector({'L': np.ones(n), 'ell': np.ones(nb)}))
    assert zero == {'L': (0.0, 0.0), 'ell': (0.0, 0.0)}
    shifted = grid_difference_norms(forms, StateVector({'L': np.full(n, 3.0), 'ell': np.ones(nb)}),
                                    StateVector({'L': np.ones(n), 'ell': np.zeros(nb)}))
    assert shifted['L'][0] == pytest.approx(2.0 * math.sqrt(forms.area), rel=1e-13)
    assert shifted['L'][1] == pytest.approx(shifted['L'][0], rel=1e-12)
    assert shifted['ell'][0] == pytest.approx(math.sqrt(forms.perimeter), rel=1e-13)
    with pytest.raises(DimensionError):
        grid_difference_norms(forms, StateVector({'L': np.ones(n)}), StateVector({'ell': np.ones(nb)}))
    with pytest.raises(DimensionError):
        grid_difference_norms(forms, StateVector({'L': np.ones(3)}), StateVector({'L': np.ones(3)}))


def test_eoc():
    rates = eoc([0.0066, 0.0018])
    assert math.isnan(rates[0])
    assert rates[1] == pytest.approx(math.log2(0.0066 / 0.0018), rel=1e-15)
    assert rates[1] == pytest.approx(1.87, abs=0.01)
    assert eoc([5.0 * 0.0066, 5.0 * 0.0018])[1] == pytest.approx(rates[1], rel=1e-14)
    assert math.isnan(eoc([1.0, 0.0])[1])
    assert eoc([4.0, 1.0, 0.25])[1:] == [2.0, 2.0]
    assert all(math.isnan(rate) for rate in eoc([3e-16, 1e-15, 4e-16]))
    assert eoc([1e-11, 2.5e-12], floor=1e-12)[1] == pytest.approx(2.0, rel=1e-14)


def test_eoc_table(tmp_path):
    table = EocTable('h', [0.5, 0.25], {'eL2_vol': [4e-2, 1e-2], 'eL2_surf': [2e-2, 5e-3],
                                        'eH1_vol': [1e-1, 5e-2], 'eH1_surf': [3e-2, 1.5e-2]})
    assert len(table) == 2
    expected = {'eL2_vol': 2.0, 'eL2_surf': 2.0, 'eH1_vol': 1.0, 'eH1_surf': 1.0}
    assert table.finest_rates() == pytest.approx(expected, rel=1e-14)
    path = table.write_csv(str(tmp_path / 'eoc.csv'))
    frame = pd.read_csv(path)
    assert list(frame.columns)[:3] == ['h_or_tau', 'eL2_vol', 'rate']
    assert frame.shape == (2, 9)
    assert frame['eL2_vol'].tolist() == [4e-2, 1e-2]
    with open(path, 'rb') as handle:
        assert b'\r\n' not in handle.read()
    text = table.to_text()
    assert '---' in text
    assert 'NaN' not in text
    assert text.splitlines()[1].split().count('---') == 4
    assert text.splitlines()[2].split()[2] == '2.00'
    assert '2.00' in text
    assert table.get_dict()['mode'] == 'h'
    with pytest.raises(DimensionError):
        EocTable('tau', [0.1], {'eL2_vol': [1.0, 2.0], 'eL2_surf': [1.0], 'eH1_vol': [1.0], 'eH1_surf': [1.0]})


def test_spectral_gap_matches_dense_solve(forms, params2):
    c0, certificate = spectral_gap(forms, params2)
    assert c0 == pytest.approx(dense_spectral_gap(forms, params2), rel=1e-8)
    assert c0 > 0.0
    model = model_for(params2)
    assert abs(model.total_mass(forms, certificate)) <= 1e-12
    eq = model.discrete_equilibrium(forms, 0.0)
    E, D = entropy(forms, params2, certificate, eq)
    assert D / E == pytest.approx(c0, rel=1e-8)


def test_spectral_gap_of_four_species(marked_forms, params4):
    c0, certificate = spectral_gap(marked_forms, params4)
    assert c0 == pytest.approx(dense_spectral_gap(marked_forms, params4), rel=1e-8)
    assert set(certificate.species) == {'L', 'P', 'ell', 'p'}
    assert abs(model_for(params4).total_mass(marked_forms, certificate)) <= 1e-12


def test_spectral_gap_needs_detailed_balance(marked_forms, unbalanced_params4):
    with pytest.raises(ModelError):
        spectral_gap(marked_forms, unbalanced_params4)


def test_faster_exchange_widens_gap(forms, params2):
    assert dense_spectral_gap(forms, params2.scaled(2.0)) > dense_spectral_gap(forms, params2)


def test_poincare_bound_is_below_gap(forms, params2):
    constant = poincare_constant(forms, params2)
    assert constant > 0.0
    assert 2.0 / constant <= dense_spectral_gap(forms, params2) * (1.0 + 1e-10)


def test_entropy_contracts_at_the_gap_rate(forms, params2):
    tau = 0.1
    c0, _ = spectral_gap(forms, params2)
    op = build_operator(forms, params2, tau)
    summary_items = []

    class Energies(object):
        def open_run(self, run):
            pass

        def process_item(self, item, run):
            summary_items.append(item.diagnostics)
            return item

        def close_run(self, run):
            pass

    run(op, initial_state(forms, builtin_initial_data('paper-2species')), TimeGrid(tau, 100), [Energies()])
    for previous, current in zip(summary_items, summary_items[1:]):
        assert current.E_disc * (1.0 + tau * c0) <= previous.E_disc * (1.0 + 1e-8)


def synthetic_series(rate=0.045, floor=1e-12, t_final=1000.0, dt=0.5):
    t = np.arange(0.0, t_final + 0.5 * dt, dt)
    return t, np.exp(-rate * t) + floor


def test_decay_fit_recovers_rate():
    t, E = synthetic_series()
    report = decay_fit(t, E, 0.045, tau=0.5)
    assert report.fitted_rate == pytest.approx(0.045, rel=1e-3)
    assert report.relative_gap_mismatch <= 1e-3
    assert report.saturation_level == pytest.approx(1e-12, rel=1e-3)
    assert report.fit_window[0] >= 50.0
    assert report.samples >= 10
    assert report.discrete_rate == pytest.approx(discrete_decay_rate(0.045, 0.5), rel=1e-15)
    assert report.get_dict()['t_start'] == report.fit_window[0]


def test_decay_fit_errors():
    t, E = synthetic_series()
    with pytest.raises(FitError):
        decay_fit(t[:40], E[:40], 0.045)
    with pytest.raises(FitError):
        decay_fit(t, np.exp(-1e-3 * t), 0.045)
    with pytest.raises(FitError):
        decay_fit(t, E[:-1], 0.045)
    with pytest.raises(FitError):
        decay_fit(t[:100], np.exp(-0.045 * t[:100]) + 1e-5, 0.045)
    E_bad = E.copy()
    E_bad[3] = np.nan
    with pytest.raises(FitError):
        decay_fit(t, E_bad, 0.045)


def test_discrete_rate_and_floor_ratios():
    assert discrete_decay_rate(0.04, 1e-8) == pytest.approx(0.04, rel=1e-8)
    assert discrete_decay_rate(0.04, 0.5) < 0.04
    reports = [decay_fit(*synthetic_series(floor=floor), spectral_gap=0.045) for floor in (1.6e-11, 1e-12)]
    assert floor_ratios(reports) == [pytest.approx(16.0, rel=1e-3)]


def test_convergence_needs_two_species():
    config = RunConfig({'model': 'four-species'})
    with pytest.raises(ConfigError):
        h_convergence_study(config)
    with pytest.raises(ConfigError):
        tau_convergence_study(config)


def test_small_h_study(small_run):
    config = RunConfig(dict(small_run, convergence={'base_level': 0, 'levels': 2, 'tau': 0.1, 't_final': 0.5}))
    table = h_convergence_study(config)
    assert len(table) == 2
    assert table.mode == 'h'
    assert table.steps[0] > table.steps[1]
    assert all(e > 0.0 for errors in table.errors.values() for e in errors)
    assert all(l2 <= h1 for l2, h1 in zip(table.errors['eL2_vol'], table.errors['eH1_vol']))


def test_small_tau_study(small_run):
    config = RunConfig(dict(small_run, convergence={'tau_list': [0.2, 0.1], 'tau_level': 0, 't_final': 0.8}))
    table = tau_convergence_study(config)
    assert table.steps == [0.2, 0.1]
    assert table.errors['eL2_vol'][1] < table.errors['eL2_vol'][0]


def test_equilibrium_data_studies_report_no_rates(small_run):
    values = dict(small_run, initial_data={'L': '0.25', 'ell': '0.5'},
                  convergence={'base_level': 0, 'levels': 2, 'tau': 0.1, 't_final': 0.8,
                               'tau_list': [0.2, 0.1], 'tau_level': 0})
    config = RunConfig(values)
    for table in (h_convergence_study(config), tau_convergence_study(config)):
        assert len(table) == 2
        assert all(e <= 1e-10 for errors in table.errors.values() for e in errors)
        assert all(math.isnan(rate) for rates in table.rates.values() for rate in rates)
        assert table.to_text().count('---') == 8


def test_decay_fit_on_perturbed_equilibrium(forms, params2, rng):
    tau = 0.5
    c0, _ = spectral_gap(forms, params2)
    op = build_operator(forms, params2, tau)
    model = op.model
    reference = model.equilibrium_vector(model.discrete_equilibrium(forms, 4.0), forms.dofs)
    ones = np.ones_like(reference)
    for _ in range(3):
        delta = 0.1 * rng.standard_normal(len(reference))
        delta -= op.total_mass(delta) / op.total_mass(ones) * ones
        assert abs(op.total_mass(delta)) <= 1e-14
        times = []
        energies = []

        class Series(object):
            def open_run(self, run):
                pass

            def process_item(self, item, run):
                times.append(item.diagnostics.t)
                energies.append(item.diagnostics.E_disc)
                return item

            def close_run(self, run):
                pass

        state0 = model.unflatten(reference + delta, forms.dofs)
        run(op, state0, TimeGrid.from_final_time(tau, 1000.0), [Series()])
        report = decay_fit(times, energies, c0, tau=tau)
        assert report.fitted_rate == pytest.approx(c0, rel=0.05)
        assert report.relative_gap_mismatch <= 0.05


def test_gap_study_on_small_mesh(small_run):
    rows, forms, certificate = gap_study(RunConfig(small_run))
    assert len(rows) == 1
    assert rows[0]['level'] == 0
    assert rows[0]['poincare_bound'] <= rows[0]['c0'] * (1.0 + 1e-10)
    assert len(certificate['L']) == forms.dofs.n_volume


@pytest.mark.slow
def test_h_convergence_acceptance():
    table = h_convergence_study(RunConfig({}))
    assert len(table) == 4
    rates = table.finest_rates()
    assert 1.8 <= rates['eL2_vol'] <= 2.2
    assert 1.8 <= rates['eL2_surf'] <= 2.2
    assert 0.9 <= rates['eH1_vol'] <= 1.1
    assert 0.9 <= rates['eH1_surf'] <= 1.1


@pytest.mark.slow
def test_h_rates_do_not_depend_on_tau():
    fine = h_convergence_study(RunConfig({})).finest_rates()
    coarse = h_convergence_study(RunConfig({'convergence': {'tau': 0.02}})).finest_rates()
    for key, rate in fine.items():
        assert abs(coarse[key] - rate) <= 0.1


@pytest.mark.slow
def test_tau_convergence_acceptance():
    table = tau_convergence_study(RunConfig({}))
    assert len(table) == 5
    for rate in table.finest_rates().values():
        assert 0.85 <= rate <= 1.1


@pytest.mark.slow
def test_decay_acceptance():
    reports, ratios, series = decay_study(RunConfig({}))
    assert len(reports) == 3
    assert all(item['entropy_nonincreasing'] for item in series)
    rates = [report.fitted_rate for report in reports]
    assert max(rates) <= 1.1 * min(rates)
    for report in reports:
        assert 0.03 <= report.fitted_rate <= 0.06
        assert report.relative_gap_mismatch <= 0.05
    for ratio in ratios:
        assert 8.0 <= ratio <= 32.0


@pytest.mark.slow
def test_four_species_decay_matches_gap():
    config = RunConfig({'model': 'four-species', 'decay': {'levels': 1}})
    reports, _, series = decay_study(config)
    assert series[0]['entropy_nonincreasing']
    assert reports[0].relative_gap_mismatch <= 0.1


@pytest.mark.slow
def test_gap_acceptance():
    rows, _, _ = gap_study(RunConfig({}))
    assert len(rows) == 2
    for row in rows:
        assert 0.03 <= row['c0'] <= 0.06
    assert abs(rows[0]['c0'] - rows[1]['c0']) <= 0.1 * rows[1]['c0']


def test_four_species_hierarchy_marking():
    meshes = build_mesh_hierarchy(2, 1, gamma2=(0.0, math.pi))
    assert meshes[1].gamma2_edge_mask.sum() == 2 * meshes[0].gamma2_edge_mask.sum()
    assert mark_gamma2(meshes[0], 0.0, math.pi).gamma2_edge_mask.sum() == 6
