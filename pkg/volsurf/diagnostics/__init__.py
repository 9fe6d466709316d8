from .convergence import (COLUMNS, EocTable, eoc, grid_difference_norms, h_convergence_study, run_jobs,
                          tau_convergence_study)
from .decay import DecayReport, decay_fit, decay_study, discrete_decay_rate, floor_ratios
from .prolongation import prolong, prolong_boundary, prolong_gamma2, prolong_state
from .spectral import ScaledPencil, dense_spectral_gap, gap_study, poincare_constant, spectral_gap
