"""Core value types for the single-excitation register simulator.

The simulation state lives in the (N+1)-dimensional single-excitation
manifold of an N-ion chain sharing one phonon mode: slot 0 is the ancilla
(one phonon, no ionic excitation) and slot k (k = 1..N) is the state with
ion k excited and zero phonons.  All types here are immutable values; the
amplitude arrays are frozen after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
    from .dynamics import IntegratorConfig

#: Norm errors up to this are treated as accumulated float noise and silently
#: repaired by renormalization; anything larger is rejected as a likely bug.
NORM_REPAIR_TOL = 1e-9

VALID_MODES = ("ideal", "physical")
VALID_VARIANTS = ("probabilistic", "deterministic")
VALID_SCALINGS = ("field", "intensity")
VALID_CALIBRATIONS = ("calibrated", "uncalibrated")
VALID_REFLECTIONS = ("adapted", "uniform")


class DimensionMismatchError(ValueError):
    """Two objects that must share a register size do not."""


class NormalizationError(ValueError):
    """Amplitude data is too far from unit norm to be float noise."""


def _unit_vector(values: Any, what: str, min_len: int) -> np.ndarray:
    vec = np.array(values, dtype=complex)
    if vec.ndim != 1:
        raise ValueError(f"{what} must be a 1-d vector, got shape {vec.shape}")
    if len(vec) < min_len:
        raise ValueError(f"{what} needs at least {min_len} components, got {len(vec)}")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > NORM_REPAIR_TOL:
        raise NormalizationError(
            f"{what} has norm {norm:.12g}; expected 1 within {NORM_REPAIR_TOL:g}"
        )
    vec /= norm
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True)
class RegisterState:
    """Normalized amplitudes over the ancilla (slot 0) and ions (slots 1..N)."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        vec = _unit_vector(self.amplitudes, "register state", min_len=3)
        object.__setattr__(self, "amplitudes", vec)

    @property
    def n_ions(self) -> int:
        return len(self.amplitudes) - 1

    @property
    def populations(self) -> np.ndarray:
        """|amplitude|^2 for every slot, ancilla first."""
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class CouplingVector:
    """Normalized per-ion coupling direction defining a Householder reflection."""

    components: np.ndarray

    def __post_init__(self) -> None:
        vec = _unit_vector(self.components, "coupling vector", min_len=2)
        object.__setattr__(self, "components", vec)

    @property
    def n_ions(self) -> int:
        return len(self.components)


def uniform_register(n_ions: int) -> RegisterState:
    """Equal-weight superposition of all ion slots (the W register), empty ancilla."""
    if n_ions < 2:
        raise ValueError(f"register needs at least 2 ions, got {n_ions}")
    amp = np.zeros(n_ions + 1, dtype=complex)
    amp[1:] = 1.0 / np.sqrt(n_ions)
    return RegisterState(amp)


def basis_register(n_ions: int, index: int) -> RegisterState:
    """Register with all population in one slot (0 = ancilla, 1..N = ions)."""
    if n_ions < 2:
        raise ValueError(f"register needs at least 2 ions, got {n_ions}")
    if not 0 <= index <= n_ions:
        raise IndexError(f"slot index {index} out of range for N={n_ions}")
    amp = np.zeros(n_ions + 1, dtype=complex)
    amp[index] = 1.0
    return RegisterState(amp)


def uniform_chi(n_ions: int) -> CouplingVector:
    """Coupling vector of a spatially uniform beam across the chain."""
    return CouplingVector(np.ones(n_ions) / np.sqrt(n_ions))


def local_chi(n_ions: int, marked_index: int) -> CouplingVector:
    """Coupling vector of a beam addressing only one ion."""
    if not 1 <= marked_index <= n_ions:
        raise IndexError(f"ion index {marked_index} out of range for N={n_ions}")
    vec = np.zeros(n_ions, dtype=complex)
    vec[marked_index - 1] = 1.0
    return CouplingVector(vec)


def fidelity(a: RegisterState, b: RegisterState) -> float:
    """Squared overlap |<a|b>|^2, insensitive to global phase."""
    if a.n_ions != b.n_ions:
        raise DimensionMismatchError(
            f"register sizes differ: {a.n_ions} vs {b.n_ions}"
        )
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def marked_probability(state: RegisterState, marked_index: int) -> float:
    """Population of the marked ion's slot."""
    if not 1 <= marked_index <= state.n_ions:
        raise IndexError(
            f"ion index {marked_index} out of range for N={state.n_ions}"
        )
    return float(abs(state.amplitudes[marked_index]) ** 2)


@dataclass(frozen=True)
class PulseSettings:
    """Defaults for the laser pulses used by a search run.

    ``peak_coupling`` is the rms Rabi peak of the 2-pi pulses; left as None it
    resolves to 2/width (the exact 2-pi area for a sech envelope).  ``spacing``
    is the distance between consecutive pulse centers, in units of the width.
    """

    shape: str = "sech"
    width: float = 1.0
    spacing: float = 30.0
    peak_coupling: float | None = None

    def __post_init__(self) -> None:
        if self.shape not in ("sech", "gaussian"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if self.width <= 0:
            raise ValueError("pulse width must be positive")
        if self.spacing <= 0:
            raise ValueError("pulse spacing must be positive")
        if self.peak_coupling is not None and self.peak_coupling <= 0:
            raise ValueError("peak coupling must be positive")


@dataclass(frozen=True)
class ImperfectionSettings:
    """Laser-beam inhomogeneity applied to the init and global pulses.

    ``custom_factors`` overrides the Gaussian-profile factors with an arbitrary
    per-ion coupling profile (e.g. for higher vibrational modes whose couplings
    depend on ion position).
    """

    epsilon: float = 0.0
    scaling: str = "field"
    calibration: str = "calibrated"
    reflection: str = "adapted"
    custom_factors: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")
        if self.scaling not in VALID_SCALINGS:
            raise ValueError(f"scaling must be one of {VALID_SCALINGS}")
        if self.calibration not in VALID_CALIBRATIONS:
            raise ValueError(f"calibration must be one of {VALID_CALIBRATIONS}")
        if self.reflection not in VALID_REFLECTIONS:
            raise ValueError(f"reflection must be one of {VALID_REFLECTIONS}")
        if self.custom_factors is not None:
            factors = tuple(float(f) for f in self.custom_factors)
            if not factors or any(f <= 0 or f > 1 for f in factors):
                raise ValueError("custom factors must lie in (0, 1]")
            object.__setattr__(self, "custom_factors", factors)


@dataclass(frozen=True)
class SearchConfig:
    """Complete description of one search experiment."""

    n_ions: int
    marked_index: int
    mode: str = "ideal"
    variant: str = "probabilistic"
    iterations: int | None = None
    pulse: PulseSettings = field(default_factory=PulseSettings)
    imperfection: ImperfectionSettings = field(default_factory=ImperfectionSettings)
    integrator: IntegratorConfig | None = None
    shots: int | None = None

    def __post_init__(self) -> None:
        if self.n_ions < 2:
            raise ValueError(f"need at least 2 ions, got {self.n_ions}")
        if not 1 <= self.marked_index <= self.n_ions:
            raise ValueError(
                f"marked index {self.marked_index} out of range for N={self.n_ions}"
            )
        if self.mode not in VALID_MODES:
            raise ValueError(f"mode must be one of {VALID_MODES}")
        if self.variant not in VALID_VARIANTS:
            raise ValueError(f"variant must be one of {VALID_VARIANTS}")
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("iteration count must be at least 1")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shot count must be at least 1")
        if (
            self.imperfection.custom_factors is not None
            and len(self.imperfection.custom_factors) != self.n_ions
        ):
            raise ValueError("custom factor vector length must equal n_ions")
        if self.integrator is None:
            from .dynamics import IntegratorConfig  # deferred: avoids module cycle

            object.__setattr__(self, "integrator", IntegratorConfig())


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a search run plus the recorded population trace.

    ``trajectory_times`` holds absolute times in physical mode and iteration
    indices in ideal mode; ``trajectory_populations`` holds one (N+1)-slot
    population row per sample, ancilla first.
    """

    final_state: RegisterState
    success_probability: float
    trajectory_times: np.ndarray
    trajectory_populations: np.ndarray
    iterations_executed: int
    parameters_used: dict

    def __post_init__(self) -> None:
        marked = self.parameters_used.get("marked_index")
        if marked is not None:
            direct = marked_probability(self.final_state, marked)
            if abs(direct - self.success_probability) > 1e-12:
                raise ValueError(
                    "success probability inconsistent with final state: "
                    f"{self.success_probability!r} vs {direct!r}"
                )
        times = np.asarray(self.trajectory_times, dtype=float)
        pops = np.asarray(self.trajectory_populations, dtype=float)
        times.setflags(write=False)
        pops.setflags(write=False)
        object.__setattr__(self, "trajectory_times", times)
        object.__setattr__(self, "trajectory_populations", pops)
