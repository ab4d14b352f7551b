import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iongrover.householder import (
    Operator,
    apply,
    compose,
    generalized_hr,
    identity_operator,
    standard_hr,
)
from iongrover.model import (
    CouplingVector,
    DimensionMismatchError,
    local_chi,
    uniform_chi,
    uniform_register,
)


def random_chi(seed: int, n: int, real: bool = False) -> CouplingVector:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=n) + (0 if real else 1j * rng.normal(size=n))
    return CouplingVector(v / np.linalg.norm(v))


def brute_reflection(chi: np.ndarray, phi: float = math.pi) -> np.ndarray:
    """Independent construction straight from the outer-product definition."""
    n = len(chi)
    mat = np.eye(n + 1, dtype=complex)
    mat[1:, 1:] += (np.exp(1j * phi) - 1.0) * np.outer(chi, chi.conj())
    return mat


class TestStandardHR:
    def test_basis_direction_is_diagonal_flip(self):
        op = standard_hr(local_chi(3, 1))
        np.testing.assert_allclose(op.matrix, np.diag([1, -1, 1, 1]), atol=1e-15)

    def test_w_direction_elements(self):
        # diagonal 1 - 2/N, off-diagonal -2/N on the manifold
        op = standard_hr(uniform_chi(4))
        block = op.matrix[1:, 1:]
        for i in range(4):
            for j in range(4):
                expected = 0.5 if i == j else -0.5
                assert block[i, j] == pytest.approx(expected, abs=1e-15)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_involution(self, seed):
        op = standard_hr(random_chi(seed, 5))
        product = op.matrix @ op.matrix
        assert np.linalg.norm(product - np.eye(6)) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_matches_outer_product_definition(self, seed):
        chi = random_chi(seed, 4)
        op = standard_hr(chi)
        np.testing.assert_allclose(op.matrix, brute_reflection(chi.components),
                                   atol=1e-14)

    def test_manifold_spectrum(self):
        # one -1 eigenvalue, the rest +1, determinant -1 on the manifold block
        block = standard_hr(random_chi(11, 7)).manifold_block
        eigs = np.linalg.eigvals(block)
        assert np.sum(np.abs(eigs + 1) < 1e-9) == 1
        assert np.sum(np.abs(eigs - 1) < 1e-9) == 6

    def test_ancilla_row_and_column_untouched(self):
        op = generalized_hr(random_chi(3, 6), 1.234)
        np.testing.assert_allclose(op.matrix[0], np.eye(7)[0], atol=1e-15)
        np.testing.assert_allclose(op.matrix[:, 0], np.eye(7)[:, 0], atol=1e-15)


class TestGeneralizedHR:
    def test_zero_phase_is_identity(self):
        op = generalized_hr(random_chi(5, 4), 0.0)
        np.testing.assert_allclose(op.matrix, np.eye(5), atol=1e-15)

    def test_pi_reduces_to_standard(self):
        chi = random_chi(9, 5)
        np.testing.assert_allclose(
            generalized_hr(chi, math.pi).matrix, standard_hr(chi).matrix, atol=1e-15
        )

    def test_basis_direction_puts_phase_on_diagonal(self):
        phi = 0.661 * math.pi
        op = generalized_hr(local_chi(5, 2), phi)
        expected = np.ones(6, dtype=complex)
        expected[2] = np.exp(1j * phi)
        np.testing.assert_allclose(op.matrix, np.diag(expected), atol=1e-15)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1),
           phi=st.floats(-math.pi, math.pi, allow_nan=False))
    def test_opposite_phases_invert(self, seed, phi):
        chi = random_chi(seed, 4)
        product = generalized_hr(chi, phi).matrix @ generalized_hr(chi, -phi).matrix
        assert np.linalg.norm(product - np.eye(5)) < 1e-12


class TestApply:
    def test_identity(self):
        state = uniform_register(6)
        out = apply(identity_operator(6), state)
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-15)

    def test_oracle_flips_marked_amplitude(self):
        state = uniform_register(5)
        out = apply(standard_hr(local_chi(5, 3)), state)
        expected = state.amplitudes.copy()
        expected[3] *= -1
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)

    def test_single_iteration_exact_for_n4(self):
        # one oracle + one global reflection moves W exactly onto the mark
        state = uniform_register(4)
        state = apply(standard_hr(local_chi(4, 2)), state)
        state = apply(standard_hr(uniform_chi(4)), state)
        assert abs(state.amplitudes[2]) ** 2 == pytest.approx(1.0, abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            apply(identity_operator(4), uniform_register(5))


class TestCompose:
    def test_single(self):
        op = standard_hr(random_chi(2, 4))
        np.testing.assert_allclose(compose([op]).matrix, op.matrix)

    def test_involution_pair(self):
        op = standard_hr(random_chi(3, 4))
        np.testing.assert_allclose(compose([op, op]).matrix, np.eye(5), atol=1e-14)

    def test_empty_needs_dimension(self):
        np.testing.assert_allclose(compose([], n_ions=3).matrix, np.eye(4))
        with pytest.raises(ValueError):
            compose([])

    def test_application_order(self):
        # first element of the list acts first on the state
        oracle = standard_hr(local_chi(4, 2))
        diffusion = standard_hr(uniform_chi(4))
        grover_op = compose([oracle, diffusion])
        np.testing.assert_allclose(grover_op.matrix,
                                   diffusion.matrix @ oracle.matrix, atol=1e-15)

    def test_three_iterations_n15(self):
        oracle = standard_hr(local_chi(15, 4))
        diffusion = standard_hr(uniform_chi(15))
        op = compose([oracle, diffusion] * 3)
        final = apply(op, uniform_register(15))
        # closed form sin^2(7 asin(1/sqrt(15)))
        expected = math.sin(7 * math.asin(1 / math.sqrt(15))) ** 2
        assert expected == pytest.approx(0.9352421018747142, abs=1e-15)
        assert abs(final.amplitudes[4]) ** 2 == pytest.approx(expected, abs=1e-12)

    def test_mismatched_dimensions(self):
        with pytest.raises(DimensionMismatchError):
            compose([identity_operator(3), identity_operator(4)])


class TestGroverEquivalence:
    @pytest.mark.parametrize("n", range(2, 11))
    def test_marked_probability_closed_form(self, n):
        theta = math.asin(1 / math.sqrt(n))
        for m in range(1, n + 1):
            op = compose([standard_hr(local_chi(n, m)), standard_hr(uniform_chi(n))])
            state = uniform_register(n)
            for k in range(1, 5):
                state = apply(op, state)
                expected = math.sin((2 * k + 1) * theta) ** 2
                assert abs(state.amplitudes[m]) ** 2 == pytest.approx(
                    expected, abs=1e-12
                )

    def test_textbook_diffusion_differs_by_global_phase_only(self):
        # reflection convention vs textbook inversion-about-the-mean: on the
        # manifold the composites differ by an overall sign, so per-step
        # probabilities agree
        n, m = 8, 3
        ours = compose(
            [standard_hr(local_chi(n, m)), standard_hr(uniform_chi(n))]
        ).manifold_block
        w = np.ones(n) / math.sqrt(n)
        diffusion = 2 * np.outer(w, w) - np.eye(n)
        oracle = np.eye(n)
        oracle[m - 1, m - 1] = -1
        textbook = diffusion @ oracle
        np.testing.assert_allclose(ours, -textbook, atol=1e-14)
        start = w.copy()
        a, b = start.copy(), start.copy()
        for _ in range(4):
            a = ours @ a
            b = textbook @ b
            assert abs(a[m - 1]) ** 2 == pytest.approx(abs(b[m - 1]) ** 2, abs=1e-13)

    def test_unitarity_gate(self):
        with pytest.raises(ValueError):
            Operator(np.diag([1.0, 1.0, 1.0 + 1e-6]))
