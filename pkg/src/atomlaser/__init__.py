"""Atom-laser linewidth simulator.

Mean-field (Gross-Pitaevskii) and truncated-Wigner dynamics of a trapped
condensate weakly outcoupled into a free beam, with the closed-form
Thomas-Fermi / phase-diffusion predictions the extracted linewidths are
compared against.
"""

__version__ = "0.1.0"

from .analysis import (arc_profile_2d, estimate_plateau, fit_gaussian,
                       linewidth_series, scaling_fit)
from .dynamics import (EvolutionSpec, FieldPair, evolve, ground_state, step,
                       to_momentum_space)
from .ensemble import EnsembleSpec, SpectrumSeries, run_ensemble
from .params import Grid, HarmonicUnits, ParameterError, PhysicalParams
from .sampling import (NoiseSpec, number_estimator, sample_coherent,
                       sample_pair, sample_squeezed)
from .theory import (chemical_potential, phase_diffusion_limit,
                     predicted_peak_momentum, squeezed_number_stats)
