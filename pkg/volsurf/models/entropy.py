"""
Total mass, relative entropy and entropy dissipation of discrete states.
"""

import numpy as np

from .system import model_for

SPECIES_DOMAINS = {'L': 'volume', 'P': 'volume', 'ell': 'boundary', 'p': 'gamma2'}


def total_mass(forms, state):
    """
    (L,1)_Ω + (ℓ,1)_Γ, plus (P,1)_Ω + (p,1)_Γ₂ for four species.
    """
    mass = 0.0
    for name in state.species:
        column_sums = np.asarray(forms.mass(SPECIES_DOMAINS[name]).sum(axis=0)).ravel()
        mass += float(column_sums.dot(state[name]))
    return mass


def entropy_terms(model, forms, deviation, weights, lumping=False):
    """
    E = ½ Σ_s w_s e_sᵀ M_s e_s and D = eᵀ W A e for a flattened deviation e
    from a constant equilibrium.
    """
    w = model.weight_vector(weights, forms.dofs)
    Me = model.mass_block(forms, lumping).dot(deviation)
    Ae = model.reaction_diffusion(forms, lumping).dot(deviation)
    E = 0.5 * float(np.dot(w * deviation, Me))
    D = float(np.dot(w * deviation, Ae))
    return E, D


def entropy(forms, params, state, equilibrium, lumping=False):
    """
    Relative entropy and its dissipation with respect to a constant
    equilibrium. Two species use the weights (λ, γ), four species
    (1/L∞, 1/P∞, 1/ℓ∞, 1/p∞).

    :return: (E, D)
    """
    model = model_for(params)
    state.check(model, forms.dofs)
    deviation = model.flatten(state) - model.equilibrium_vector(equilibrium, forms.dofs)
    return entropy_terms(model, forms, deviation, model.entropy_weights(equilibrium), lumping)
