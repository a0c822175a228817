"""Radial chemotaxis solver with Robin signal loss and inward total flux.

The package simulates a chemotactic density u and a signal v on a ball,
where the signal leaks through the boundary at rate h and the density is
pumped inward in proportion to the leak (weight alpha in [0, 1]).  It
ships a finite-volume solver on the radial profile, diagnostics for the
exact mass balance and the energy identity, a classifier for the parameter
regimes with provably bounded solutions, and moment-based blow-up checks.
"""

from .blowup import (
    BlowupAssessment,
    MomentBound,
    MomentOdiResult,
    assess,
    blowup_mass_threshold,
    e_theta,
    j_theta,
    moment_odi_residual,
    theta_exponent,
)
from .core import (
    DomainSpec,
    GaussianBump,
    ModelParams,
    RadialGrid,
    RadialState,
    RunConfig,
    SourceSpec,
    boundary_value,
    build_grid,
    gaussian_by_mass,
    gaussian_initial,
    integrate,
    omega_n,
    zero_flux_sourceless,
)
from .diagnostics import (
    DiagnosticsRecord,
    EnergyResidualSeries,
    WeightedMassSpec,
    boundary_mass_flux,
    compute_record,
    dissipation,
    energy_identity_residual,
    lyapunov,
    moment,
    w12_norm,
    weighted_mass,
)
from .regime import (
    BoundednessCondition,
    EpsilonWitness,
    RegimeVerdict,
    TraceConstantEstimate,
    classify_tau0,
    classify_tau1,
    estimate_trace_constant,
    find_epsilon_witness,
    principal_robin_eigenvalue,
    verify_witness,
    witness_inequalities,
)
from .solver import (
    RunStats,
    Sample,
    StepController,
    StepInfo,
    TerminationStatus,
    Trajectory,
    advance,
    chemotactic_flux,
    reconstruct_2d,
    solve_elliptic_v,
    step,
    step_detailed,
)

__version__ = "0.1.0"

__all__ = [
    "BlowupAssessment",
    "BoundednessCondition",
    "DiagnosticsRecord",
    "DomainSpec",
    "EnergyResidualSeries",
    "EpsilonWitness",
    "GaussianBump",
    "ModelParams",
    "MomentBound",
    "MomentOdiResult",
    "RadialGrid",
    "RadialState",
    "RegimeVerdict",
    "RunConfig",
    "RunStats",
    "Sample",
    "SourceSpec",
    "StepController",
    "StepInfo",
    "TerminationStatus",
    "TraceConstantEstimate",
    "Trajectory",
    "WeightedMassSpec",
    "advance",
    "assess",
    "blowup_mass_threshold",
    "boundary_mass_flux",
    "boundary_value",
    "build_grid",
    "chemotactic_flux",
    "classify_tau0",
    "classify_tau1",
    "compute_record",
    "dissipation",
    "e_theta",
    "energy_identity_residual",
    "estimate_trace_constant",
    "find_epsilon_witness",
    "gaussian_by_mass",
    "gaussian_initial",
    "integrate",
    "j_theta",
    "lyapunov",
    "moment",
    "moment_odi_residual",
    "omega_n",
    "principal_robin_eigenvalue",
    "reconstruct_2d",
    "solve_elliptic_v",
    "step",
    "step_detailed",
    "theta_exponent",
    "verify_witness",
    "w12_norm",
    "weighted_mass",
    "zero_flux_sourceless",
]
