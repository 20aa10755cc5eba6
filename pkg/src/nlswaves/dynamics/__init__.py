from .distances import (DistanceError, energy_space_distance,
                        hydrodynamic_distance, untwisted_momentum)
from .functionals import (amplitude_energy_floor, field_energy, field_momentum,
                          kink_functional, liapunov_functional)
from .integrator import (DynamicsError, FieldState, RunDiagnostics, evolve,
                         fit_growth_rate)

__all__ = [
    "DistanceError", "DynamicsError", "FieldState", "RunDiagnostics",
    "amplitude_energy_floor", "energy_space_distance", "evolve",
    "field_energy", "field_momentum", "fit_growth_rate",
    "hydrodynamic_distance", "kink_functional", "liapunov_functional",
    "untwisted_momentum",
]
