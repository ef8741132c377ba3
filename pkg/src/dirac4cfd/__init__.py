"""Fourth-order compact finite difference solvers for the two-component
Dirac equation in the massless and nonrelativistic regime, with a
time-splitting spectral reference solver and an experiment harness."""

from .config import (
    SCHEME_IMPLICIT,
    SCHEME_SEMI_IMPLICIT,
    SCHEME_TSSP,
    SchemeConfig,
)
from .grids import Grid, SpinorField, build_grid, sample_field
from .observables import (
    convergence_order,
    current_density,
    discrete_energy,
    error_triple,
    mass_l2,
    relative_error,
    total_density,
)
from .potentials import PotentialSet, sample_potentials, zero_potentials
from .spectral import (
    ModeSpectrum,
    apply_Ah,
    apply_Ah_inv,
    apply_delta_x,
    dft_forward,
    dft_inverse,
    gamma,
    spectral_derivative,
)
from .steppers import (
    RunResult,
    SolverError,
    StabilityError,
    StabilityReport,
    TwoLevelState,
    amplification_factor,
    check_stability,
    first_step,
    implicit_step_1d,
    run,
    semi_implicit_step,
)
from .tssp import (
    compute_reference,
    free_propagator_mode,
    potential_propagator_point,
    restrict,
    tssp_step,
)

__version__ = "0.1.0"

__all__ = [
    "Grid", "SpinorField", "build_grid", "sample_field",
    "PotentialSet", "sample_potentials", "zero_potentials",
    "SchemeConfig", "SCHEME_IMPLICIT", "SCHEME_SEMI_IMPLICIT", "SCHEME_TSSP",
    "ModeSpectrum", "dft_forward", "dft_inverse", "gamma",
    "apply_delta_x", "apply_Ah", "apply_Ah_inv", "spectral_derivative",
    "TwoLevelState", "StabilityReport", "RunResult",
    "SolverError", "StabilityError",
    "first_step", "semi_implicit_step", "implicit_step_1d",
    "check_stability", "amplification_factor", "run",
    "free_propagator_mode", "potential_propagator_point",
    "tssp_step", "compute_reference", "restrict",
    "total_density", "current_density", "mass_l2", "discrete_energy",
    "relative_error", "error_triple", "convergence_order",
]
