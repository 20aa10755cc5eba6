"""Travelling waves of the 1-D defocusing NLS with nonzero background:
construction, energy-momentum diagrams, orbital stability classification,
linearized spectra, and dynamical verification."""

from .nonlinearity import (BUILTIN_MODELS, ModelError, NonlinearityModel,
                           builtin_model, kappa_family, make_model, sonic_index)
from .potential import (ExistenceVerdict, PotentialCurve, PotentialError,
                        find_turning_point, kink_turning_expansion_residual,
                        newton_potential, newton_potential_prime)
from .profile import (DecayFit, ProfileError, TailInfo, WaveProfile,
                      complex_field, fit_decay, solve_profile)
from .invariants import (BranchDiagram, BranchPoint, InvariantError,
                         bubble_momentum_slope, compute_diagram, energy,
                         energy_quadrature, extrapolate_momentum_to_zero,
                         kink_energy, kink_momentum_slope, momentum_grid,
                         momentum_quadrature)
from .spectrum import (LinearizedOperators, SpectrumError, SpectrumReport,
                       build_operators, continuum_edge, count_negative,
                       find_unstable_mode, mode_to_field, spectrum_report)
from .dynamics import (DistanceError, DynamicsError, FieldState, RunDiagnostics,
                       amplitude_energy_floor, energy_space_distance, evolve,
                       field_energy, field_momentum, fit_growth_rate,
                       hydrodynamic_distance, kink_functional,
                       liapunov_functional, untwisted_momentum)

__version__ = "0.1.0"
