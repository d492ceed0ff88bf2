"""Adiabatic geometric phases of two uniaxially coupled spin-1/2 particles in a rotating field."""

from .errors import (
    AdiabaticityFailure,
    CoupledBerryError,
    DegenerateAlongPath,
    DegenerateRoots,
    DegenerateSchmidt,
    NonconvergentQuadrature,
    NormDrift,
    SingularScaleFactor,
    TransitionPath,
    UndefinedPhase,
)
from .model import (
    BRANCHES,
    Branch,
    EigenSolution,
    ModelParams,
    SchmidtData,
    TripletState,
    bloch_length,
    build_hamiltonian,
    instantaneous_eigenstate,
    schmidt_decompose,
    solve_shifted_eigenvalues,
)
from .oracles import (
    PropagationResult,
    SchmidtTrack,
    adiabatic_limit_phase,
    adiabatic_propagate,
    composite_from_schmidt,
    mixed_state_phase_numeric,
    schmidt_track,
    singlet_propagate,
    wilson_loop_phase,
)
from .paths import ConstantPolar, LoopPath, Parametrized, static_loop, transition_loop
from .phases import (
    PhaseResult,
    composite_phase_constant_theta,
    constant_theta_phases,
    degenerate_zero_g_subsystem_phase,
    scale_factor,
    schmidt_vector_phase,
    solid_angle,
    subsystem_phase_constant_theta,
    transition_path_phase,
    weighted_principal_phase,
    wrap_phase,
    zero_coupling_phase,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantPolar",
    "LoopPath",
    "Parametrized",
    "static_loop",
    "transition_loop",
    "AdiabaticityFailure",
    "BRANCHES",
    "Branch",
    "CoupledBerryError",
    "DegenerateAlongPath",
    "DegenerateRoots",
    "DegenerateSchmidt",
    "EigenSolution",
    "ModelParams",
    "NonconvergentQuadrature",
    "NormDrift",
    "PhaseResult",
    "PropagationResult",
    "SchmidtData",
    "SchmidtTrack",
    "SingularScaleFactor",
    "TransitionPath",
    "TripletState",
    "UndefinedPhase",
    "adiabatic_limit_phase",
    "adiabatic_propagate",
    "bloch_length",
    "build_hamiltonian",
    "composite_from_schmidt",
    "composite_phase_constant_theta",
    "constant_theta_phases",
    "degenerate_zero_g_subsystem_phase",
    "instantaneous_eigenstate",
    "mixed_state_phase_numeric",
    "scale_factor",
    "schmidt_decompose",
    "schmidt_track",
    "schmidt_vector_phase",
    "singlet_propagate",
    "solid_angle",
    "solve_shifted_eigenvalues",
    "subsystem_phase_constant_theta",
    "transition_path_phase",
    "weighted_principal_phase",
    "wilson_loop_phase",
    "wrap_phase",
    "zero_coupling_phase",
]
