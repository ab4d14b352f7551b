"""End-to-end search orchestration: init, iteration schedule, detection.

A search is init followed by repeated (oracle, global reflection) pairs.
In ideal mode the reflections are exact operators; in physical mode every
reflection is one laser pulse and the whole schedule is integrated as
time-dependent dynamics.  The probabilistic variant uses resonant pulses
(reflection phase pi); the deterministic variant detunes both pulses of each
iteration to the matched phase that makes the final fidelity exactly one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import imperfections
from .dynamics import evolve, evolve_schedule, hamiltonian_from_pulse
from .householder import apply, generalized_hr
from .model import (
    CouplingVector,
    RegisterState,
    SearchConfig,
    SearchResult,
    basis_register,
    local_chi,
    marked_probability,
)
from .pulses import PulseShape, PulseSpec, detuning_for_phase

#: Detection flags the run when this much population never left the ancilla.
RESIDUAL_FLAG_LEVEL = 0.01


def iteration_count(n_ions: int) -> int:
    """Optimal number of search iterations, [pi / (2 asin(2 sqrt(N-1)/N))]."""
    if n_ions < 2:
        raise ValueError(f"need at least 2 ions, got {n_ions}")
    angle = math.asin(2.0 * math.sqrt(n_ions - 1) / n_ions)
    return int(math.floor(math.pi / (2.0 * angle) + 1e-12))


def deterministic_params(n_ions: int) -> tuple[int, float]:
    """Iteration count and matched reflection phase for a unit-fidelity search.

    With beta = asin(1/sqrt(N)), J is the smallest count admitting phase
    matching and phi = 2 asin(sin(pi/(4J+2)) / sin(beta)); running J
    iterations with both reflections at phase phi ends exactly on the marked
    state.
    """
    if n_ions < 2:
        raise ValueError(f"need at least 2 ions, got {n_ions}")
    beta = math.asin(1.0 / math.sqrt(n_ions))
    count = math.ceil((math.pi / 2.0 - beta) / (2.0 * beta) - 1e-12)
    ratio = math.sin(math.pi / (4 * count + 2)) / math.sin(beta)
    phi = 2.0 * math.asin(min(1.0, ratio))
    return count, phi


@dataclass(frozen=True)
class IterationPlan:
    """Resolved schedule: counts, phase, and the materialized steps.

    ``steps`` holds one (oracle, reflection) pair per iteration, as exact
    operators in ideal mode or pulse specs in physical mode; ``init_pulse``
    is set in physical mode only.
    """

    variant: str
    count: int
    phi: float
    delta_t: float
    init_pulse: PulseSpec | None
    steps: tuple[tuple[Any, Any], ...]

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("iteration count must be at least 1")
        if not 0.0 < self.phi <= math.pi:
            raise ValueError("reflection phase must lie in (0, pi]")


def _profile_factors(cfg: SearchConfig) -> np.ndarray:
    imp = cfg.imperfection
    if imp.custom_factors is not None:
        return np.asarray(imp.custom_factors, dtype=float)
    return imperfections.beam_factors(cfg.n_ions, imp.epsilon, imp.scaling)


def _resolve_phase(cfg: SearchConfig) -> tuple[int, float, float]:
    count = cfg.iterations
    if cfg.variant == "deterministic":
        if count is None:
            count, phi = deterministic_params(cfg.n_ions)
        else:
            # phase matching re-solves for the requested count; any count at
            # or above the minimal one still ends exactly on the mark, below
            # it the ratio clips and the search falls back to phase pi
            beta = math.asin(1.0 / math.sqrt(cfg.n_ions))
            ratio = math.sin(math.pi / (4 * count + 2)) / math.sin(beta)
            phi = 2.0 * math.asin(min(1.0, ratio))
        delta_t = 0.0 if phi == math.pi else detuning_for_phase(phi, 1)
    else:
        if count is None:
            count = iteration_count(cfg.n_ions)
        phi, delta_t = math.pi, 0.0
    return count, phi, delta_t


def _reflection_chi(cfg: SearchConfig, factors: np.ndarray) -> CouplingVector:
    if cfg.imperfection.reflection == "uniform":
        return CouplingVector(np.ones(cfg.n_ions) / math.sqrt(cfg.n_ions))
    return CouplingVector(factors / np.linalg.norm(factors))


def _init_pulse(cfg: SearchConfig, factors: np.ndarray, global_peak: float,
                center: float) -> PulseSpec:
    shape = PulseShape(cfg.pulse.shape, cfg.pulse.width)
    norm = float(np.linalg.norm(factors))
    chi = CouplingVector(factors / norm)
    # Same beam as the global pulse at half the Rabi frequency; calibrated
    # means the power is trimmed for an exact rms-pi transfer, uncalibrated
    # leaves it at the uniform-beam setting.
    peak = global_peak / 2.0
    if cfg.imperfection.calibration == "uncalibrated":
        peak *= norm / math.sqrt(cfg.n_ions)
    return PulseSpec(shape, chi, peak, detuning=0.0, center=center)


def build_plan(cfg: SearchConfig) -> IterationPlan:
    """Materialize the iteration schedule for a config."""
    count, phi, delta_t = _resolve_phase(cfg)
    factors = _profile_factors(cfg)
    refl_chi = _reflection_chi(cfg, factors)
    oracle_chi = local_chi(cfg.n_ions, cfg.marked_index)

    if cfg.mode == "ideal":
        oracle = generalized_hr(oracle_chi, phi)
        reflection = generalized_hr(refl_chi, phi)
        return IterationPlan(cfg.variant, count, phi, delta_t, None,
                             tuple((oracle, reflection) for _ in range(count)))

    shape = PulseShape(cfg.pulse.shape, cfg.pulse.width)
    width = cfg.pulse.width
    spacing = cfg.pulse.spacing * width
    global_peak = cfg.pulse.peak_coupling
    if global_peak is None:
        global_peak = 2.0 * math.pi / shape.integral()
    delta = delta_t / width
    centers = [(0.5 + i) * spacing for i in range(2 * count + 1)]
    init = _init_pulse(cfg, factors, global_peak, centers[0])
    steps = []
    for k in range(count):
        oracle = PulseSpec(shape, oracle_chi, global_peak, detuning=delta,
                           center=centers[1 + 2 * k])
        glob = PulseSpec(shape, refl_chi, global_peak, detuning=delta,
                         center=centers[2 + 2 * k])
        steps.append((oracle, glob))
    return IterationPlan(cfg.variant, count, phi, delta_t, init, tuple(steps))


def initialize(cfg: SearchConfig) -> RegisterState:
    """Prepare the start register: the bright state of the (possibly
    profile-shaped) init beam, exact in ideal mode, integrated in physical."""
    factors = _profile_factors(cfg)
    if cfg.mode == "ideal":
        reg = imperfections.register_from_factors(
            factors, calibrated=cfg.imperfection.calibration == "calibrated"
        )
        return reg.to_state()
    shape = PulseShape(cfg.pulse.shape, cfg.pulse.width)
    global_peak = cfg.pulse.peak_coupling
    if global_peak is None:
        global_peak = 2.0 * math.pi / shape.integral()
    pulse = _init_pulse(cfg, factors, global_peak, center=0.0)
    return evolve(basis_register(cfg.n_ions, 0),
                  hamiltonian_from_pulse(pulse), cfg.integrator)


def run_search(cfg: SearchConfig) -> SearchResult:
    """Execute init, all iterations, and detection for one config."""
    plan = build_plan(cfg)
    peak = cfg.pulse.peak_coupling
    if peak is None:
        peak = 2.0 * math.pi / PulseShape(cfg.pulse.shape, cfg.pulse.width).integral()
    params = {
        "n_ions": cfg.n_ions,
        "marked_index": cfg.marked_index,
        "mode": cfg.mode,
        "variant": cfg.variant,
        "iterations": plan.count,
        "phi": plan.phi,
        "delta_t": plan.delta_t,
        "peak_coupling": peak,
        "pulse_shape": cfg.pulse.shape,
        "pulse_width": cfg.pulse.width,
        "pulse_spacing": cfg.pulse.spacing,
        "epsilon": cfg.imperfection.epsilon,
        "scaling": cfg.imperfection.scaling,
        "calibration": cfg.imperfection.calibration,
        "reflection": cfg.imperfection.reflection,
    }

    if cfg.mode == "ideal":
        state = initialize(cfg)
        times = [0.0]
        pops = [state.populations]
        for k, (oracle, reflection) in enumerate(plan.steps, start=1):
            state = apply(reflection, apply(oracle, state))
            times.append(float(k))
            pops.append(state.populations)
    else:
        schedule = [plan.init_pulse]
        for oracle, reflection in plan.steps:
            schedule.extend((oracle, reflection))
        state, times, pops = evolve_schedule(
            basis_register(cfg.n_ions, 0), schedule, cfg.integrator, record=True
        )

    return SearchResult(
        final_state=state,
        success_probability=marked_probability(state, cfg.marked_index),
        trajectory_times=np.asarray(times, dtype=float),
        trajectory_populations=np.asarray(pops, dtype=float),
        iterations_executed=plan.count,
        parameters_used=params,
    )


@dataclass(frozen=True)
class Detection:
    """Projective readout: per-ion probabilities plus the ancilla residual."""

    probabilities: np.ndarray
    residual: float
    found: int
    residual_flagged: bool


def detect(state: RegisterState) -> Detection:
    """Read out which ion carries the excitation."""
    pops = state.populations
    probs = pops[1:].copy()
    probs.setflags(write=False)
    residual = float(pops[0])
    return Detection(
        probabilities=probs,
        residual=residual,
        found=int(np.argmax(probs)) + 1,
        residual_flagged=residual > RESIDUAL_FLAG_LEVEL,
    )


def sample_detection(state: RegisterState, shots: int, seed: int) -> np.ndarray:
    """Multinomial shot counts over (no-click, ion 1..N); excluded from any
    accuracy guarantees, provided for realistic-looking records only."""
    if shots < 1:
        raise ValueError("need at least one shot")
    rng = np.random.default_rng(seed)
    pvals = state.populations
    pvals = pvals / pvals.sum()
    return rng.multinomial(shots, pvals)
