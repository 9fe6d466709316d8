"""
Block structure of the semi-discrete systems M u' + A u = 0.

Each model knows its species layout, assembles the block mass matrix and
the unscaled reaction-diffusion matrix A from the AssembledForms, and
supplies the equilibrium and the entropy weights. Row-scaling A by the
entropy weights gives the symmetric dissipation form.
"""

from abc import ABCMeta, abstractmethod
import logging

import numpy as np
import scipy.sparse as sps

from ..exceptions import DimensionError, ModelError
from ..fem.assembly import lumped
from .equilibrium import equilibrium2, equilibrium4
from .params import ModelParams2, ModelParams4
from .state import StateVector


class AbstractModel:
    """Abstract class for volume-surface models."""

    __metaclass__ = ABCMeta

    name = None
    # (species name, domain) in block order
    species = ()

    @abstractmethod
    def __init__(self, params):
        self.params = params
        self.log = logging.getLogger(__name__)

    @property
    def species_names(self):
        return tuple(name for name, _ in self.species)

    def sizes(self, dofs):
        return [dofs.size(domain) for _, domain in self.species]

    def offsets(self, dofs):
        return np.concatenate([[0], np.cumsum(self.sizes(dofs))]).astype(int)

    def flatten(self, state):
        return np.concatenate([np.asarray(state[name], dtype=float) for name in self.species_names])

    def unflatten(self, vector, dofs, t=0.0):
        offsets = self.offsets(dofs)
        if len(vector) != offsets[-1]:
            raise DimensionError("vector of length %d does not match %d DOFs" % (len(vector), offsets[-1]))
        return StateVector(dict((name, vector[offsets[i]:offsets[i + 1]])
                                for i, name in enumerate(self.species_names)), t)

    def mass_matrices(self, forms, lumping=False):
        """Per-species mass matrices, row-sum lumped on request."""
        matrices = [forms.mass(domain) for _, domain in self.species]
        if lumping:
            matrices = [lumped(m) for m in matrices]
        return matrices

    def mass_block(self, forms, lumping=False):
        return sps.block_diag(self.mass_matrices(forms, lumping), format='csr')

    def mass_weights(self, forms):
        """Vector c with cᵀu the total mass of a flattened state."""
        return np.concatenate([np.asarray(m.sum(axis=0)).ravel() for m in self.mass_matrices(forms)])

    def total_mass(self, forms, state):
        return float(sum(np.asarray(forms.mass(domain).sum(axis=0)).ravel().dot(state[name])
                         for name, domain in self.species))

    @abstractmethod
    def reaction_diffusion(self, forms, lumping=False):
        """Unscaled block matrix A of M u' + A u = 0."""

    @abstractmethod
    def equilibrium(self, geometry, mass):
        """Constant equilibrium for the given measures and total mass."""

    @abstractmethod
    def entropy_weights(self, equilibrium):
        """Per-species weights of the relative entropy."""

    @property
    def has_constant_equilibrium(self):
        return True

    def operator_weights(self):
        """
        Species weights that symmetrize A. Scale-free: equal to the entropy
        weights up to a common positive factor.
        """
        return self.entropy_weights(self.equilibrium(self.unit_geometry(), 1.0))

    def unit_geometry(self):
        return {'area': 1.0, 'perimeter': 1.0, 'gamma2_length': 1.0}

    def weight_vector(self, weights, dofs):
        return np.concatenate([np.full(n, w) for n, w in zip(self.sizes(dofs), weights)])

    def equilibrium_vector(self, equilibrium, dofs):
        return np.concatenate([np.full(dofs.size(domain), equilibrium[name]) for name, domain in self.species])

    def check_forms(self, forms):
        return forms

    def discrete_equilibrium(self, forms, mass):
        return self.equilibrium(forms.geometry(), mass)


class TwoSpeciesModel(AbstractModel):
    """
    L in Ω, ℓ on Γ:
      L_t - d_L ΔL = 0,  d_L ∂_n L = γℓ - λL,  ℓ_t - d_ℓ Δ_Γ ℓ = λL - γℓ.
    """

    name = 'two-species'
    species = (('L', 'volume'), ('ell', 'boundary'))

    def __init__(self, params):
        super(TwoSpeciesModel, self).__init__(params)
        if not isinstance(params, ModelParams2):
            raise ModelError("two-species model needs ModelParams2")

    def reaction_diffusion(self, forms, lumping=False):
        p = self.params
        T = forms.trace
        Mb = lumped(forms.M_bnd) if lumping else forms.M_bnd
        return sps.bmat([
            [p.d_L * forms.A_vol + p.lam * (T.T @ Mb @ T), -p.gamma * (T.T @ Mb)],
            [-p.lam * (Mb @ T), p.d_l * forms.A_bnd + p.gamma * Mb],
        ], format='csr')

    def equilibrium(self, geometry, mass):
        return equilibrium2(self.params, geometry['area'], geometry['perimeter'], mass)

    def entropy_weights(self, equilibrium=None):
        return [self.params.lam, self.params.gamma]

    def operator_weights(self):
        return self.entropy_weights()


class FourSpeciesModel(AbstractModel):
    """
    L, P in Ω, ℓ on Γ, p on Γ₂ ⊂ Γ with the reaction pairs
    L <-> P in Ω, L <-> ℓ on Γ, ℓ <-> p and P <-> p on Γ₂.
    """

    name = 'four-species'
    species = (('L', 'volume'), ('P', 'volume'), ('ell', 'boundary'), ('p', 'gamma2'))

    def __init__(self, params):
        super(FourSpeciesModel, self).__init__(params)
        if not isinstance(params, ModelParams4):
            raise ModelError("four-species model needs ModelParams4")

    @property
    def has_constant_equilibrium(self):
        return self.params.detailed_balance

    def check_forms(self, forms):
        if forms.dofs.n_gamma2 == 0:
            raise ModelError("four-species model needs a mesh with a Γ₂ marking")
        return forms

    def reaction_diffusion(self, forms, lumping=False):
        self.check_forms(forms)
        p = self.params
        T = forms.trace
        E = forms.dofs.gamma2_embed
        T2 = forms.dofs.gamma2_trace
        Mv = lumped(forms.M_vol) if lumping else forms.M_vol
        Mb = lumped(forms.M_bnd) if lumping else forms.M_bnd
        Mg = lumped(forms.M_g2) if lumping else forms.M_g2
        return sps.bmat([
            [p.d_L * forms.A_vol + p.beta * Mv + p.lam * (T.T @ Mb @ T), -p.alpha * Mv,
             -p.gamma * (T.T @ Mb), None],
            [-p.beta * Mv, p.d_P * forms.A_vol + p.alpha * Mv + p.eta * (T2.T @ Mg @ T2),
             None, -p.xi * (T2.T @ Mg)],
            [-p.lam * (Mb @ T), None,
             p.d_l * forms.A_bnd + p.gamma * Mb + p.sigma * (E.T @ Mg @ E), -p.kappa * (E.T @ Mg)],
            [None, -p.eta * (Mg @ T2), -p.sigma * (Mg @ E),
             p.d_p * forms.A_g2 + (p.kappa + p.xi) * Mg],
        ], format='csr')

    def equilibrium(self, geometry, mass):
        return equilibrium4(self.params, geometry['area'], geometry['perimeter'], geometry['gamma2_length'], mass)

    def entropy_weights(self, equilibrium):
        values = [equilibrium[name] for name in self.species_names]
        if min(values) <= 0.0:
            raise ModelError("entropy weights 1/X∞ need a positive equilibrium (mass %.3g)" % equilibrium.mass)
        return [1.0 / v for v in values]

    def operator_weights(self):
        if not self.params.detailed_balance:
            return None
        return super(FourSpeciesModel, self).operator_weights()


def model_for(params):
    """Model instance matching the parameter set."""
    if isinstance(params, ModelParams2):
        return TwoSpeciesModel(params)
    if isinstance(params, ModelParams4):
        return FourSpeciesModel(params)
    raise ModelError("no model for parameters of type %s" % type(params).__name__)
