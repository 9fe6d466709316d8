from .entropy import SPECIES_DOMAINS, entropy, entropy_terms, total_mass
from .equilibrium import Equilibrium, equilibrium2, equilibrium4
from .initial_data import BUILTIN_INITIAL_DATA, builtin_initial_data, exact_mass, initial_data_from_config
from .params import DETAILED_BALANCE_TOLERANCE, ModelParams2, ModelParams4, params_from_config
from .state import StateVector
from .stationary import stationary_solve
from .system import AbstractModel, FourSpeciesModel, TwoSpeciesModel, model_for
