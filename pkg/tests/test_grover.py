import math

import numpy as np
import pytest

from iongrover.dynamics import hamiltonian_from_pulse, hr_distance, propagator
from iongrover.grover import (
    build_plan,
    detect,
    deterministic_params,
    initialize,
    iteration_count,
    run_search,
    sample_detection,
)
from iongrover.householder import generalized_hr
from iongrover.imperfections import beam_factors
from iongrover.model import (
    ImperfectionSettings,
    SearchConfig,
    basis_register,
    fidelity,
    uniform_register,
)


def closed_form(n: int, k: int) -> float:
    return math.sin((2 * k + 1) * math.asin(1 / math.sqrt(n))) ** 2


class TestIterationCount:
    @pytest.mark.parametrize("n,expected", [(15, 3), (4, 1), (20, 3), (2, 1), (3, 1)])
    def test_reference_values(self, n, expected):
        assert iteration_count(n) == expected

    @pytest.mark.parametrize("n", [64, 256, 1024])
    def test_large_n_asymptotic(self, n):
        assert abs(iteration_count(n) - (math.pi / 4) * math.sqrt(n)) <= 1.0

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            iteration_count(1)


class TestDeterministicParams:
    def test_n15(self):
        count, phi = deterministic_params(15)
        assert count == 3
        assert phi == pytest.approx(0.661 * math.pi, abs=0.001 * math.pi)

    def test_n4_reduces_to_standard(self):
        count, phi = deterministic_params(4)
        assert count == 1
        assert phi == pytest.approx(math.pi, abs=1e-7)

    def test_n100_unit_fidelity(self):
        cfg = SearchConfig(n_ions=100, marked_index=42, variant="deterministic")
        assert run_search(cfg).success_probability > 1 - 1e-9

    @pytest.mark.parametrize("n", range(3, 65))
    def test_unit_fidelity_sweep(self, n):
        cfg = SearchConfig(n_ions=n, marked_index=1 + n // 2, variant="deterministic")
        assert run_search(cfg).success_probability > 1 - 1e-9

    @pytest.mark.parametrize("extra", [0, 1, 2])
    def test_unit_fidelity_at_longer_counts(self, extra):
        # phase matching admits any count at or above the minimal one
        count = deterministic_params(15)[0] + extra
        cfg = SearchConfig(n_ions=15, marked_index=8, variant="deterministic",
                           iterations=count)
        result = run_search(cfg)
        assert result.iterations_executed == count
        assert result.success_probability > 1 - 1e-9


class TestInitialize:
    def test_ideal_uniform(self):
        state = initialize(SearchConfig(n_ions=8, marked_index=1))
        np.testing.assert_allclose(state.amplitudes[1:], 1 / math.sqrt(8), atol=1e-15)
        assert state.amplitudes[0] == 0

    def test_physical_reaches_w_state(self):
        cfg = SearchConfig(n_ions=15, marked_index=1, mode="physical")
        state = initialize(cfg)
        assert fidelity(state, uniform_register(15)) > 1 - 1e-6
        assert state.populations[0] < 1e-6

    def test_physical_beam_profile_matches_bright_state(self):
        eps = 0.1
        cfg = SearchConfig(
            n_ions=15, marked_index=1, mode="physical",
            imperfection=ImperfectionSettings(epsilon=eps),
        )
        state = initialize(cfg)
        factors = beam_factors(15, eps)
        expected = np.concatenate(([0.0], factors / np.linalg.norm(factors)))
        # register amplitudes proportional to the profile factors
        overlap = abs(np.vdot(expected, state.amplitudes)) ** 2
        assert overlap > 1 - 1e-6
        assert state.populations[0] < 1e-6

    def test_uncalibrated_profile_leaves_residual(self):
        cfg = SearchConfig(
            n_ions=15, marked_index=1, mode="physical",
            imperfection=ImperfectionSettings(epsilon=0.3,
                                              calibration="uncalibrated"),
        )
        state = initialize(cfg)
        factors = beam_factors(15, 0.3)
        # analytic two-level rotation in the ancilla/bright subspace
        half_area = math.pi * np.linalg.norm(factors) / (2 * math.sqrt(15))
        assert state.populations[0] == pytest.approx(math.cos(half_area) ** 2,
                                                     abs=1e-6)


class TestRunSearchIdeal:
    def test_probabilistic_n15(self):
        result = run_search(SearchConfig(n_ions=15, marked_index=8))
        assert result.iterations_executed == 3
        assert result.success_probability == pytest.approx(closed_form(15, 3),
                                                           abs=1e-12)

    def test_probabilistic_n4_single_step_exact(self):
        result = run_search(SearchConfig(n_ions=4, marked_index=2))
        assert result.iterations_executed == 1
        assert result.success_probability == pytest.approx(1.0, abs=1e-12)

    def test_deterministic_n15_unity(self):
        result = run_search(
            SearchConfig(n_ions=15, marked_index=8, variant="deterministic")
        )
        assert result.success_probability > 1 - 1e-9

    @pytest.mark.parametrize("n", [2, 7, 23, 40, 64])
    def test_trajectory_matches_closed_form(self, n):
        result = run_search(SearchConfig(n_ions=n, marked_index=1))
        m = 1
        for k in range(result.iterations_executed + 1):
            expected = closed_form(n, k)
            assert result.trajectory_populations[k, m] == pytest.approx(
                expected, abs=1e-12
            )

    def test_iteration_override(self):
        result = run_search(SearchConfig(n_ions=15, marked_index=8, iterations=5))
        assert result.iterations_executed == 5
        assert result.success_probability == pytest.approx(closed_form(15, 5),
                                                           abs=1e-12)

    def test_marked_symmetry(self):
        probs = {
            m: run_search(SearchConfig(n_ions=9, marked_index=m)).success_probability
            for m in range(1, 10)
        }
        spread = max(probs.values()) - min(probs.values())
        assert spread <= 1e-9


class TestRunSearchPhysical:
    def test_probabilistic_n15_band(self):
        cfg = SearchConfig(n_ions=15, marked_index=8, mode="physical")
        result = run_search(cfg)
        assert 0.90 <= result.success_probability <= 0.94
        assert result.success_probability == pytest.approx(closed_form(15, 3),
                                                           abs=1e-4)

    def test_deterministic_n15(self):
        cfg = SearchConfig(n_ions=15, marked_index=8, mode="physical",
                           variant="deterministic")
        result = run_search(cfg)
        assert result.success_probability >= 0.999
        assert result.parameters_used["phi"] == pytest.approx(
            0.661 * math.pi, abs=0.001 * math.pi
        )
        assert result.parameters_used["delta_t"] == pytest.approx(0.589, abs=0.002)

    def test_converges_to_ideal_with_step_budget(self):
        # per-pulse propagators within 1e-5 of the exact reflections keeps the
        # final probability within 1e-3 of ideal mode
        n, m = 5, 2
        cfg = SearchConfig(n_ions=n, marked_index=m, mode="physical")
        plan = build_plan(cfg)
        for pulse in plan.steps[0]:
            u = propagator(hamiltonian_from_pulse(pulse), cfg.integrator)
            assert hr_distance(u, generalized_hr(pulse.chi, math.pi)) <= 1e-5
        ideal = run_search(SearchConfig(n_ions=n, marked_index=m))
        physical = run_search(cfg)
        assert abs(physical.success_probability - ideal.success_probability) <= 1e-3

    def test_oracle_locality(self):
        # the oracle pulse must leave every unmarked slot magnitude alone
        from iongrover.dynamics import evolve
        from iongrover.pulses import build_local_pulse

        cfg = SearchConfig(n_ions=6, marked_index=3, mode="physical")
        state = initialize(cfg)
        pulse = build_local_pulse(3, 6)
        after = evolve(state, hamiltonian_from_pulse(pulse), cfg.integrator)
        before_mag = np.abs(state.amplitudes)
        after_mag = np.abs(after.amplitudes)
        for k in range(1, 7):
            if k != 3:
                assert abs(after_mag[k] - before_mag[k]) < 1e-6

    def test_physical_marked_symmetry(self):
        probs = [
            run_search(SearchConfig(n_ions=4, marked_index=m,
                                    mode="physical")).success_probability
            for m in (1, 3)
        ]
        assert abs(probs[0] - probs[1]) <= 1e-5

    def test_trajectory_shape(self):
        cfg = SearchConfig(n_ions=4, marked_index=2, mode="physical")
        result = run_search(cfg)
        assert result.trajectory_populations.shape[1] == 5
        assert len(result.trajectory_times) == len(result.trajectory_populations)
        assert np.all(np.diff(result.trajectory_times) > 0)
        # populations always sum to one along the trace
        sums = result.trajectory_populations.sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, atol=1e-9)


class TestDetection:
    def test_deterministic_final_state(self):
        result = run_search(
            SearchConfig(n_ions=15, marked_index=11, variant="deterministic")
        )
        det = detect(result.final_state)
        assert det.found == 11
        assert det.probabilities[10] > 1 - 1e-9
        assert not det.residual_flagged

    def test_w_state_uniform(self):
        det = detect(uniform_register(10))
        np.testing.assert_allclose(det.probabilities, 0.1, atol=1e-12)
        assert det.residual == 0.0

    def test_ancilla_flagged(self):
        det = detect(basis_register(5, 0))
        np.testing.assert_allclose(det.probabilities, 0.0)
        assert det.residual == pytest.approx(1.0)
        assert det.residual_flagged

    def test_shot_sampling_deterministic_per_seed(self):
        state = uniform_register(5)
        a = sample_detection(state, 1000, seed=7)
        b = sample_detection(state, 1000, seed=7)
        np.testing.assert_array_equal(a, b)
        assert a.sum() == 1000
        assert len(a) == 6


class TestPlan:
    def test_physical_plan_layout(self):
        cfg = SearchConfig(n_ions=15, marked_index=8, mode="physical",
                           variant="deterministic")
        plan = build_plan(cfg)
        assert plan.count == 3
        assert plan.init_pulse.center == pytest.approx(15.0)
        centers = [p.center for pair in plan.steps for p in pair]
        np.testing.assert_allclose(centers, [45, 75, 105, 135, 165, 195])
        assert plan.init_pulse.detuning == 0.0
        for oracle, reflection in plan.steps:
            assert oracle.detuning == pytest.approx(plan.delta_t)
            assert reflection.detuning == pytest.approx(plan.delta_t)

    def test_ideal_plan_holds_operators(self):
        plan = build_plan(SearchConfig(n_ions=5, marked_index=2))
        oracle, reflection = plan.steps[0]
        assert oracle.matrix.shape == (6, 6)
        assert reflection.matrix.shape == (6, 6)
