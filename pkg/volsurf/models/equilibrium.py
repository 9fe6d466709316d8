"""
Closed-form constant equilibria. Both work with exact geometry (|Ω|, |Γ|,
|Γ₂| of the smooth domain) and with the discrete measures of Ω_h.
"""

import logging

from ..exceptions import ModelError
from .params import DETAILED_BALANCE_TOLERANCE

log = logging.getLogger(__name__)


class Equilibrium(object):
    """Constant equilibrium values per species with the geometry and mass used."""

    def __init__(self, values, geometry, mass):
        self.values = dict(values)
        self.geometry = dict(geometry)
        self.mass = float(mass)

    def __getitem__(self, name):
        return self.values[name]

    def get_dict(self):
        return {'values': dict(self.values), 'geometry': dict(self.geometry), 'mass': self.mass}

    def __repr__(self):
        return 'Equilibrium(%s; mass=%.17g)' % (', '.join('%s=%.17g' % item for item in self.values.items()),
                                                 self.mass)


def _check_geometry(**measures):
    for name, value in measures.items():
        if not value > 0.0:
            raise ModelError("equilibrium needs positive %s (got %r)" % (name, value))


def equilibrium2(params, area, perimeter, mass):
    """
    L∞ = γM / (γ|Ω| + λ|Γ|), ℓ∞ = (λ/γ) L∞.
    """
    _check_geometry(area=area, perimeter=perimeter)
    if mass < 0.0:
        raise ModelError("equilibrium needs nonnegative mass (got %r)" % mass)
    L = params.gamma * mass / (params.gamma * area + params.lam * perimeter)
    ell = params.lam / params.gamma * L
    return Equilibrium({'L': L, 'ell': ell}, {'area': area, 'perimeter': perimeter}, mass)


def equilibrium4(params, area, perimeter, gamma2_length, mass):
    """
    L∞ = M / (|Ω|(1 + β/α) + |Γ|λ/γ + |Γ₂|λσ/(γκ)), P∞ = (β/α)L∞,
    ℓ∞ = (λ/γ)L∞, p∞ = (σ/κ)ℓ∞.

    :raises ModelError: when detailed balance is violated
    """
    if params.detailed_balance_residual > DETAILED_BALANCE_TOLERANCE:
        raise ModelError("four-species equilibrium requires detailed balance; residual "
                         "|αλσξ/(βγκη) - 1| = %.3e exceeds %.0e"
                         % (params.detailed_balance_residual, DETAILED_BALANCE_TOLERANCE))
    _check_geometry(area=area, perimeter=perimeter, gamma2_length=gamma2_length)
    if mass < 0.0:
        raise ModelError("equilibrium needs nonnegative mass (got %r)" % mass)
    denominator = (area * (1.0 + params.beta / params.alpha)
                   + perimeter * params.lam / params.gamma
                   + gamma2_length * params.lam * params.sigma / (params.gamma * params.kappa))
    L = mass / denominator
    P = params.beta / params.alpha * L
    ell = params.lam / params.gamma * L
    p = params.sigma / params.kappa * ell
    return Equilibrium({'L': L, 'P': P, 'ell': ell, 'p': p},
                       {'area': area, 'perimeter': perimeter, 'gamma2_length': gamma2_length}, mass)
