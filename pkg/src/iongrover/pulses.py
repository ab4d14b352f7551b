"""Pulse envelopes, area accounting and the detuning <-> phase calculus.

A pulse with rms area 2*pi*l and a constant detuning delta realizes a
generalized Householder reflection whose phase depends only on the
dimensionless product delta*T.  For the sech envelope the map is the closed
form ``phase_from_detuning``; for other envelopes the (area, detuning) pair
is calibrated numerically against the integrated propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq, minimize_scalar

from .model import CouplingVector, local_chi


class NoSolutionError(ValueError):
    """The requested reflection phase is not attainable at the given area."""


def wrap_phase(phi: float) -> float:
    """Reduce an angle to the principal branch (-pi, pi]."""
    r = math.remainder(phi, 2.0 * math.pi)
    return r + 2.0 * math.pi if r <= -math.pi else r


@dataclass(frozen=True)
class PulseShape:
    """Dimensionless envelope f(t) with unit peak, symmetric about t = 0.

    ``width`` is the characteristic time T: sech uses f = sech(t/T), gaussian
    uses f = exp(-(t/T)^2).  A tabulated shape interpolates linearly between
    the given samples and is zero outside them.
    """

    kind: str
    width: float
    times: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("sech", "gaussian", "tabulated"):
            raise ValueError(f"unknown pulse shape {self.kind!r}")
        if self.width <= 0:
            raise ValueError("pulse width must be positive")
        if self.kind == "tabulated":
            if self.times is None or self.values is None:
                raise ValueError("tabulated shape needs times and values")
            times = tuple(float(t) for t in self.times)
            values = tuple(float(v) for v in self.values)
            if len(times) != len(values) or len(times) < 2:
                raise ValueError("tabulated shape needs matching sample arrays")
            if any(v < 0 for v in values):
                raise ValueError("envelope samples must be nonnegative")
            object.__setattr__(self, "times", times)
            object.__setattr__(self, "values", values)

    def envelope(self, t):
        """Evaluate f(t); accepts scalars or arrays."""
        if self.kind == "sech":
            return 1.0 / np.cosh(np.asarray(t) / self.width)
        if self.kind == "gaussian":
            return np.exp(-((np.asarray(t) / self.width) ** 2))
        return np.interp(np.asarray(t), self.times, self.values, left=0.0, right=0.0)

    def integral(self, window: float | None = None) -> float:
        """Integral of f over [-window*T, window*T], full line when window is None."""
        if self.kind == "sech":
            if window is None:
                return math.pi * self.width
            x = math.exp(-window)
            # full-line pi*T minus the two tails 2*T*atan(e^-w) each
            return self.width * (math.pi - 4.0 * math.atan(x))
        if self.kind == "gaussian":
            if window is None:
                return math.sqrt(math.pi) * self.width
            return math.sqrt(math.pi) * self.width * math.erf(window)
        lo, hi = self.times[0], self.times[-1]
        if window is not None:
            lo, hi = max(lo, -window * self.width), min(hi, window * self.width)
        if hi <= lo:
            return 0.0
        grid = np.linspace(lo, hi, 4097)
        return float(trapezoid(self.envelope(grid), grid))


@dataclass(frozen=True)
class PulseSpec:
    """One laser pulse: direction chi, rms Rabi peak, detuning and center time.

    The per-ion coupling amplitudes are ``rms_peak * chi``; since chi is
    normalized, the root-mean-square of the couplings equals ``rms_peak``.
    """

    shape: PulseShape
    chi: CouplingVector
    rms_peak: float
    detuning: float = 0.0
    center: float = 0.0

    def __post_init__(self) -> None:
        if self.rms_peak < 0:
            raise ValueError("rms peak must be nonnegative")

    @property
    def couplings(self) -> np.ndarray:
        return self.rms_peak * self.chi.components

    @property
    def n_ions(self) -> int:
        return self.chi.n_ions


def rms_area(pulse: PulseSpec, window: float | None = None) -> float:
    """Temporal rms area g * integral(f) in radians."""
    return pulse.rms_peak * pulse.shape.integral(window)


def phase_from_detuning(delta_t: float, l: int = 1) -> float:
    """Reflection phase of a sech pulse with rms area 2*pi*l at detuning delta*T.

    phi = 2 * sum_{j=0}^{l-1} arg(delta*T + i(2j+1)), reduced to (-pi, pi].
    Resonance gives phi = pi for odd l and phi = 0 for even l.
    """
    if l < 1:
        raise ValueError(f"area index l must be a positive integer, got {l}")
    raw = 2.0 * sum(math.atan2(2 * j + 1, delta_t) for j in range(l))
    return wrap_phase(raw)


def detuning_for_phase(phi: float, l: int = 1) -> float:
    """Invert ``phase_from_detuning`` on its principal positive branch.

    Valid targets are 0 < phi <= pi; the underlying unwrapped map decreases
    monotonically from l*pi to 0 as delta*T grows, so the solution is unique.
    For l = 1 the closed form is delta*T = cot(phi/2).
    """
    if l < 1:
        raise ValueError(f"area index l must be a positive integer, got {l}")
    if not 0.0 < phi <= math.pi:
        raise NoSolutionError(
            f"phase {phi!r} not attainable on the principal branch (0, pi]"
        )
    if l == 1:
        return 1.0 / math.tan(phi / 2.0)

    def raw(x: float) -> float:
        return 2.0 * sum(math.atan2(2 * j + 1, x) for j in range(l))

    lo, hi = 0.0, 4.0 * l / math.tan(phi / 2.0) + 4.0 * l
    while raw(hi) > phi:
        hi *= 2.0
    root = brentq(lambda x: raw(x) - phi, lo, hi, xtol=1e-14, rtol=8.9e-16)
    return float(root)


def _resolved_peak(shape: PulseShape, area: float, peak_coupling: float | None) -> float:
    return peak_coupling if peak_coupling is not None else area / shape.integral()


def build_global_pulse(
    chi: CouplingVector,
    phase: float = math.pi,
    shape: str = "sech",
    width: float = 1.0,
    peak_coupling: float | None = None,
    center: float = 0.0,
) -> PulseSpec:
    """Rms-area-2*pi pulse on the whole chain realizing M(chi; phase).

    ``phase = pi`` gives the resonant standard reflection; other phases set
    the detuning via the sech closed form (use ``calibrate_generalized_pulse``
    for non-sech envelopes).
    """
    shp = PulseShape(shape, width)
    peak = _resolved_peak(shp, 2.0 * math.pi, peak_coupling)
    delta_t = 0.0 if phase == math.pi else detuning_for_phase(phase, 1)
    return PulseSpec(shp, chi, peak, detuning=delta_t / width, center=center)


def build_local_pulse(
    marked_index: int,
    n_ions: int,
    phase: float = math.pi,
    shape: str = "sech",
    width: float = 1.0,
    peak_coupling: float | None = None,
    center: float = 0.0,
) -> PulseSpec:
    """2*pi pulse addressing one ion: the oracle reflection M(chi_m; phase)."""
    chi = local_chi(n_ions, marked_index)
    return build_global_pulse(chi, phase, shape, width, peak_coupling, center)


def calibrate_generalized_pulse(
    chi: CouplingVector,
    phase: float,
    shape: str = "gaussian",
    width: float = 1.0,
    coarse_steps: int = 1500,
) -> PulseSpec:
    """Numerically calibrate (area, detuning) of a non-sech generalized reflection.

    Nested root-finding against the integrated propagator: the inner loop picks
    the pulse area that closes the ancilla leakage at a trial detuning, the
    outer loop moves the detuning until the fitted reflection phase matches.
    The sech solution seeds the search bracket.
    """
    from . import dynamics  # deferred: dynamics depends on this module

    if not 0.0 < phase < math.pi:
        raise NoSolutionError("calibration targets phases strictly inside (0, pi)")
    shp = PulseShape(shape, width)
    probe_chi = local_chi(2, 1)
    cfg = dynamics.IntegratorConfig(steps_per_pulse=coarse_steps)
    area_lo, area_hi = 1.2 * math.pi, 3.2 * math.pi

    # probes only steer the root finder, so they run coarse and with a loose
    # unitarity gate; the returned pulse is exact to the solver precision
    def probe(area: float, delta_t: float):
        spec = dynamics.HamiltonianSpec(
            (area / shp.integral()) * probe_chi.components, shp, delta_t / width
        )
        return dynamics.propagator(spec, cfg, unitarity_tol=1e-2)

    def best_area(delta_t: float) -> float:
        res = minimize_scalar(
            lambda area: 1.0 - abs(probe(area, delta_t).matrix[1, 1]),
            bounds=(area_lo, area_hi), method="bounded", options={"xatol": 1e-10},
        )
        return float(res.x)

    def fitted_phase(delta_t: float) -> float:
        return float(np.angle(probe(best_area(delta_t), delta_t).matrix[1, 1]))

    seed = detuning_for_phase(phase, 1)
    lo, hi = 0.05 * seed, 8.0 * seed + 4.0
    while fitted_phase(hi) > phase:
        hi *= 2.0
        if hi > 1e3:
            raise NoSolutionError(f"no detuning found for phase {phase!r}")
    delta_t = float(brentq(lambda x: fitted_phase(x) - phase, lo, hi, xtol=1e-10))
    area = best_area(delta_t)
    return PulseSpec(shp, chi, area / shp.integral(), detuning=delta_t / width)
