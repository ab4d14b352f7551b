"""Grover search in a trapped-ion chain driven by Householder-reflection pulses.

Exact operator products (``ideal`` mode) and time-dependent pulse integration
(``physical`` mode) of the same search protocol, plus beam-inhomogeneity
robustness studies and a reproduction CLI.
"""

__version__ = "0.1.0"

from .dynamics import (
    HamiltonianSpec,
    IntegrationError,
    IntegratorConfig,
    evolve,
    evolve_schedule,
    fit_hr_phase,
    hamiltonian_from_pulse,
    hamiltonian_matrix,
    hr_distance,
    propagator,
)
from .grover import (
    Detection,
    IterationPlan,
    build_plan,
    detect,
    deterministic_params,
    initialize,
    iteration_count,
    run_search,
    sample_detection,
)
from .householder import Operator, apply, compose, generalized_hr, identity_operator, standard_hr
from .imperfections import (
    BeamProfile,
    PerturbedRegister,
    SweepRow,
    adapted_chi,
    adapted_iteration_count,
    adapted_advantage,
    beam_factors,
    infidelity_sweep,
    register_from_factors,
)
from .model import (
    CouplingVector,
    DimensionMismatchError,
    ImperfectionSettings,
    NormalizationError,
    PulseSettings,
    RegisterState,
    SearchConfig,
    SearchResult,
    basis_register,
    fidelity,
    local_chi,
    marked_probability,
    uniform_chi,
    uniform_register,
)
from .pulses import (
    NoSolutionError,
    PulseShape,
    PulseSpec,
    build_global_pulse,
    build_local_pulse,
    calibrate_generalized_pulse,
    detuning_for_phase,
    phase_from_detuning,
    rms_area,
    wrap_phase,
)

__all__ = [name for name in dir() if not name.startswith("_")]
