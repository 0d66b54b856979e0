"""Numerical laboratory for radial Schrodinger flows on hyperbolic 3-space.

The package solves  i u_t + Laplacian u = kappa |u|^{2 sigma} u  for radial
data on H^3 (and on R^3 for side-by-side comparison) with a sine-spectral
Strang splitting, and ships the diagnostics used to probe dispersive decay:
explicit propagator kernels, large-time asymptotic profiles, scattering
defects and pairings, interaction (Morawetz) momenta, Galilean-type
operators and the pseudo-conformal virial balance, plus a small-dispersion
scaling ladder.  The `hypnls` command line runs the packaged experiments.
"""

from .geometry import (
    AdmissiblePair,
    Geometry,
    RadialGrid,
    delta_exponent,
    distance_derivative,
    hyperbolic_distance,
    r_coth_r,
    reduction_weight,
    sinhc,
    strichartz_weight,
    volume_weight,
)
from .transforms import (
    RadialField,
    SpectralField,
    continuum_transform,
    field_from_reduced,
    forward_transform,
    inverse_transform,
    l2_norm,
    lq_norm,
    mass,
    reduced_derivative,
    reduced_values,
    sobolev_norm,
    spectral_mass,
    tail_mass_fraction,
    transform_at_zero,
)
from .propagators import (
    asymptotic_profile,
    free_evolve,
    free_evolve_kernel,
    h2_kernel_integral,
    h2_kernel_majorant,
    propagation_symbol,
)
from .integrator import (
    BoundaryReflectionError,
    FieldBlowupError,
    SimulationAbort,
    SolverConfig,
    Trajectory,
    energy,
    evolve,
    nonlinear_step,
    strang_step,
)
from .diagnostics import (
    DegenerateDataError,
    ResolutionError,
    ScatteringReport,
    fit_power_law,
    galilean_apply,
    galilean_norm,
    interaction_momentum,
    morawetz_check,
    nonlinear_pairing,
    pseudo_conformal,
    scattering_defect,
    scattering_profile,
    scattering_report,
    spacetime_norm,
    weighted_gn_ratio,
)
from .config import ConfigError, EXPERIMENTS, ExperimentConfig, resolve_config
from .experiments import (
    bump_profile,
    compact_bump,
    gaussian_bump,
    initial_field,
    longrange_experiment,
    run_experiment,
    semiclassical_experiment,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
