import math
import pickle

import numpy as np
import pytest

from volsurf.exceptions import DimensionError, ModelError
from volsurf.expressions import parse_expression
from volsurf.fem.assembly import assemble
from volsurf.mesh.curves import UnitCircle
from volsurf.mesh.disk_mesh import build_mesh_hierarchy
from volsurf.models.entropy import entropy, total_mass
from volsurf.models.equilibrium import equilibrium2, equilibrium4
from volsurf.models.initial_data import builtin_initial_data, exact_mass, initial_data_from_config
from volsurf.models.params import ModelParams2, ModelParams4, params_from_config
from volsurf.models.state import StateVector
from volsurf.models.stationary import stationary_solve
from volsurf.models.system import FourSpeciesModel, TwoSpeciesModel, model_for
from volsurf.stepper.time_stepper import initial_state


def constant_state(forms, model, values):
    return StateVector(dict((name, np.full(forms.dofs.size(domain), values[name]))
                            for name, domain in model.species))


def random_state(forms, model, rng):
    return StateVector(dict((name, rng.uniform(0.0, 2.0, forms.dofs.size(domain)))
                            for name, domain in model.species))


def test_total_mass_of_constants(hexagon_forms):
    zero = StateVector({'L': np.zeros(7), 'ell': np.zeros(6)})
    assert total_mass(hexagon_forms, zero) == 0.0
    ones = StateVector({'L': np.ones(7), 'ell': np.ones(6)})
    assert total_mass(hexagon_forms, ones) == pytest.approx(1.5 * math.sqrt(3.0) + 6.0, rel=1e-14)


def test_four_species_mass(marked_forms):
    model = FourSpeciesModel(ModelParams4())
    state = constant_state(marked_forms, model, {'L': 1.0, 'P': 1.0, 'ell': 1.0, 'p': 1.0})
    expected = 2.0 * marked_forms.area + marked_forms.perimeter + marked_forms.gamma2_length
    assert total_mass(marked_forms, state) == pytest.approx(expected, rel=1e-14)
    assert model.total_mass(marked_forms, state) == pytest.approx(expected, rel=1e-14)


def test_builtin_initial_data():
    two = builtin_initial_data('paper-2species')
    assert float(two['L'](1.0, 0.0)) == 0.5
    assert float(two['ell'](1.0, 0.0)) == 1.0
    assert float(two['L'](0.0, 0.0)) == 0.0
    four = builtin_initial_data('paper-4species')
    assert float(four['p'](0.0, 1.0)) == pytest.approx(1.4, rel=1e-15)
    assert float(four['L'](-1.0, 0.0)) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ModelError):
        builtin_initial_data('paper-3species')


def test_initial_data_must_cover_the_species():
    model = TwoSpeciesModel(ModelParams2())
    data = initial_data_from_config({'L': '1', 'ell': 'x + y'}, model)
    assert float(data['ell'](1.0, 2.0)) == 3.0
    with pytest.raises(ModelError):
        initial_data_from_config({'L': '1'}, model)
    with pytest.raises(ModelError):
        initial_data_from_config({'L': '1', 'ell': '1', 'p': '1'}, model)
    with pytest.raises(ModelError):
        initial_data_from_config('paper-4species', model)


def test_exact_mass_of_builtin_data():
    data = builtin_initial_data('paper-2species')
    assert exact_mass(UnitCircle(), data) == pytest.approx(5.0 * math.pi / 4.0, rel=1e-10)


def test_exact_mass_on_arc():
    data = {'p': parse_expression('1')}
    assert exact_mass(UnitCircle(), data, (0.0, math.pi)) == pytest.approx(math.pi, rel=1e-12)
    with pytest.raises(ModelError):
        exact_mass(UnitCircle(), data)


def test_equilibrium2_examples():
    params = ModelParams2(d_L=0.01, d_l=0.02, lam=4.0, gamma=2.0)
    eq = equilibrium2(params, math.pi, 2.0 * math.pi, 5.0 * math.pi / 4.0)
    assert eq['L'] == pytest.approx(0.25, rel=1e-15)
    assert eq['ell'] == pytest.approx(0.5, rel=1e-15)
    assert params.lam * eq['L'] == pytest.approx(params.gamma * eq['ell'], rel=1e-15)

    zero = equilibrium2(params, math.pi, 2.0 * math.pi, 0.0)
    assert zero['L'] == zero['ell'] == 0.0

    symmetric = equilibrium2(ModelParams2(lam=3.0, gamma=3.0), 2.0, 5.0, 14.0)
    assert symmetric['L'] == pytest.approx(2.0, rel=1e-15)
    assert symmetric['ell'] == pytest.approx(2.0, rel=1e-15)

    with pytest.raises(ModelError):
        equilibrium2(params, 0.0, 1.0, 1.0)


def test_equilibrium4_examples(params4):
    eq = equilibrium4(params4, 3.0, 6.0, 3.0, 12.0)
    assert eq['L'] == pytest.approx(12.0 / (2 * 3.0 + 2 * 6.0 + 2 * 3.0), rel=1e-15)
    p = params4
    assert p.beta * eq['L'] == pytest.approx(p.alpha * eq['P'], rel=1e-14)
    assert p.lam * eq['L'] == pytest.approx(p.gamma * eq['ell'], rel=1e-14)
    assert p.sigma * eq['ell'] == pytest.approx(p.kappa * eq['p'], rel=1e-14)
    assert p.eta * eq['P'] == pytest.approx(p.xi * eq['p'], rel=1e-14)

    symmetric = ModelParams4(alpha=2.0, beta=2.0, lam=3.0, gamma=3.0, sigma=0.5, kappa=0.5, eta=1.5, xi=1.5)
    eq = equilibrium4(symmetric, 1.0, 2.0, 0.5, 9.0)
    assert all(eq[name] == pytest.approx(9.0 / (2.0 + 2.0 + 0.5), rel=1e-15) for name in ('L', 'P', 'ell', 'p'))


def test_detailed_balance(params4, unbalanced_params4):
    assert params4.detailed_balance_residual == 0.0
    assert params4.detailed_balance
    assert unbalanced_params4.detailed_balance_residual == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ModelError) as error:
        equilibrium4(unbalanced_params4, 1.0, 1.0, 1.0, 1.0)
    assert 'detailed balance' in str(error.value)
    assert FourSpeciesModel(unbalanced_params4).operator_weights() is None


def test_params_validation():
    with pytest.raises(ModelError):
        ModelParams2(d_L=0.0)
    with pytest.raises(ModelError):
        ModelParams4(kappa=-1.0)
    with pytest.raises(ModelError):
        params_from_config('two-species', {'delta': 1.0})
    with pytest.raises(ModelError):
        params_from_config('three-species', {})
    params = params_from_config('two-species', {'lambda': 1.5, 'd_ell': 0.3})
    assert (params.lam, params.d_l, params.gamma) == (1.5, 0.3, 2.0)
    assert params.get_dict()['lambda'] == 1.5


def test_model_for(params2, params4):
    assert isinstance(model_for(params2), TwoSpeciesModel)
    assert isinstance(model_for(params4), FourSpeciesModel)
    with pytest.raises(ModelError):
        model_for(object())


def test_state_dimensions(forms, params2):
    model = model_for(params2)
    with pytest.raises(DimensionError):
        StateVector({'L': np.ones(3), 'ell': np.ones(forms.dofs.n_boundary)}).check(model, forms.dofs)
    with pytest.raises(DimensionError):
        StateVector({'L': np.ones(forms.dofs.n_volume)}).check(model, forms.dofs)


def test_four_species_needs_marking(forms, params4):
    with pytest.raises(ModelError):
        FourSpeciesModel(params4).reaction_diffusion(forms)


def test_entropy_vanishes_at_equilibrium(forms, params2):
    model = model_for(params2)
    eq = model.discrete_equilibrium(forms, 3.0)
    E, D = entropy(forms, params2, constant_state(forms, model, eq.values), eq)
    assert abs(E) <= 1e-28
    assert abs(D) <= 1e-26


def test_entropy_is_nonnegative(marked_forms, params2, params4, rng):
    forms2 = marked_forms
    for params in (params2, params4):
        model = model_for(params)
        for _ in range(100):
            state = random_state(forms2, model, rng)
            eq = model.discrete_equilibrium(forms2, model.total_mass(forms2, state))
            E, D = entropy(forms2, params, state, eq)
            assert E >= 0.0
            assert D >= -1e-12 * E


def test_dissipation_of_constant_states(forms, params2):
    model = model_for(params2)
    eq = model.discrete_equilibrium(forms, 2.0)
    c1, c2 = 0.7, 0.1
    _, D = entropy(forms, params2, constant_state(forms, model, {'L': c1, 'ell': c2}), eq)
    expected = (params2.lam * c1 - params2.gamma * c2) ** 2 * forms.perimeter
    assert D == pytest.approx(expected, rel=1e-12)


def test_discrete_equilibrium_is_stationary(marked_forms, params2, params4):
    for params in (params2, params4):
        model = model_for(params)
        eq = model.discrete_equilibrium(marked_forms, 5.0)
        u = model.equilibrium_vector(eq, marked_forms.dofs)
        A = model.reaction_diffusion(marked_forms)
        assert np.max(np.abs(A.dot(u))) <= 1e-10 * abs(A).max() * np.max(u)


def test_closed_form_matches_stationary_solve(marked_forms, params2, params4):
    for params in (params2, params4):
        model = model_for(params)
        solved = stationary_solve(marked_forms, model, 5.0)
        eq = model.discrete_equilibrium(marked_forms, 5.0)
        for name in model.species_names:
            assert np.allclose(solved[name], eq[name], rtol=1e-10, atol=0.0)


def test_discrete_equilibrium_converges():
    params = ModelParams2()
    model = model_for(params)
    data = builtin_initial_data('paper-2species')
    errors = []
    for mesh in build_mesh_hierarchy(4, 3):
        forms = assemble(mesh)[1]
        eq = model.discrete_equilibrium(forms, total_mass(forms, initial_state(forms, data)))
        errors.append(abs(eq['L'] - 0.25) + abs(eq['ell'] - 0.5))
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.0 <= coarse / fine <= 5.0


def test_entropy_weights_scale(forms, params2, rng):
    model = model_for(params2)
    state = random_state(forms, model, rng)
    eq = model.discrete_equilibrium(forms, model.total_mass(forms, state))
    scaled = params2.scaled(3.0)
    E1, _ = entropy(forms, params2, state, eq)
    E3, _ = entropy(forms, scaled, state, model_for(scaled).discrete_equilibrium(forms, eq.mass))
    assert E3 == pytest.approx(3.0 * E1, rel=1e-12)


def test_expressions():
    f = parse_expression('x*sin(x + 1) + 0.5')
    assert np.allclose(f(np.array([0.0, 1.0]), np.array([0.0, 0.0])), [0.5, math.sin(2.0) + 0.5], rtol=1e-15)
    assert f(np.zeros(4), np.zeros(4)).shape == (4,)
    assert np.array_equal(parse_expression('2')(np.zeros(3), np.zeros(3)), [2.0, 2.0, 2.0])
    clone = pickle.loads(pickle.dumps(f))
    assert float(clone(1.0, 0.0)) == float(f(1.0, 0.0))
    for bad in ('exp(x)', 'z + 1', 'x +', '__import__("os")'):
        with pytest.raises(ModelError):
            parse_expression(bad)


def test_expression_derivatives():
    f = parse_expression('x**2*y + cos(y)')
    dx = f.derivative('x')
    dy = f.derivative('y')
    assert float(dx(2.0, 3.0)) == pytest.approx(12.0, rel=1e-15)
    assert float(dy(2.0, 0.5)) == pytest.approx(4.0 - math.sin(0.5), rel=1e-15)
    assert float(pickle.loads(pickle.dumps(dx))(2.0, 3.0)) == float(dx(2.0, 3.0))
    assert 'derivative' in repr(dx)
    assert np.array_equal(parse_expression('3').derivative('x')(np.ones(2), np.ones(2)), [0.0, 0.0])
    with pytest.raises(ModelError):
        f.derivative('z')
    with pytest.raises(ModelError):
        dx.derivative('x')
