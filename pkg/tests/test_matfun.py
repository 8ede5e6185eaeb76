import mpmath
import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import simpson

from wishart_rates import matfun
from wishart_rates.errors import InvalidInput, NoUniqueSolution, StabilityViolation
from wishart_rates.matfun import LoewnerOrder

M5 = np.array([[-1.4, 0.1], [0.1, -1.3]])
Q5 = np.array([[1.0, 0.2], [0.3, 0.5]])

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def expm_reference(A):
    # scipy's expm can itself be off by ~1e-12 relative, so the reference is computed at 40 digits
    with mpmath.workdps(40):
        return np.array(mpmath.expm(mpmath.matrix(np.asarray(A).tolist())).tolist(), dtype=float)


def square(d):
    return arrays(np.float64, (d, d), elements=finite)


@st.composite
def spd(draw, d=None, shift=0.1):
    d = draw(st.integers(1, 4)) if d is None else d
    G = draw(square(d))
    return G @ G.T + shift * np.eye(d)


@st.composite
def hurwitz(draw, d):
    A = draw(square(d))
    return A - (matfun.spectral_abscissa(A) + draw(st.floats(0.1, 2.0))) * np.eye(d)


class TestMatExp:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(matfun.mat_exp(np.zeros((2, 2))), np.eye(2), rtol=1e-15, atol=1e-15)

    def test_diagonal(self):
        out = matfun.mat_exp(np.diag([np.log(2.0), np.log(3.0)]))
        np.testing.assert_allclose(out, np.diag([2.0, 3.0]), rtol=1e-14, atol=1e-15)

    def test_nilpotent(self):
        np.testing.assert_allclose(matfun.mat_exp([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInput):
            matfun.mat_exp([[np.nan, 0.0], [0.0, 1.0]])

    def test_batched_matches_single(self):
        stack = np.stack([M5 * t for t in (0.0, 0.5, 20.0)])
        out = matfun.mat_exp(stack)
        for k in range(3):
            np.testing.assert_allclose(out[k], matfun.mat_exp(stack[k]), rtol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 5).flatmap(square))
    def test_against_extended_precision(self, A):
        ref = expm_reference(A)
        assert np.max(np.abs(matfun.mat_exp(A) - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))

    def test_all_ones_matrix(self):
        # J^2 = 3J gives e^{cJ} = I + (e^{3c} - 1)/3 J
        J = np.ones((3, 3))
        expected = np.eye(3) + np.expm1(8.25) / 3.0 * J
        np.testing.assert_allclose(matfun.mat_exp(2.75 * J), expected, rtol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, 3, elements=finite), arrays(np.float64, 3, elements=finite))
    def test_commuting_sum(self, a, b):
        A, B = np.diag(a), np.diag(b)
        lhs = matfun.mat_exp(A + B)
        rhs = matfun.mat_exp(A) @ matfun.mat_exp(B)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(lhs)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4).flatmap(hurwitz))
    def test_hurwitz_decay(self, A):
        tau = 40.0 / abs(matfun.spectral_abscissa(A))
        assert matfun.max_abs(matfun.mat_exp(A * tau)) < 1e-8

    def test_large_norm_relative_accuracy(self):
        A = 50.0 * np.array([[0.3, -0.8], [0.6, -0.2]])
        ref = expm_reference(A)
        assert matfun.max_abs(matfun.mat_exp(A) - ref) <= 1e-12 * matfun.max_abs(ref)


class TestHyperbolic:
    def test_tanh_at_zero(self):
        np.testing.assert_allclose(matfun.mat_tanh(np.eye(2), 0.0), np.zeros((2, 2)), atol=1e-15)

    def test_tanh_saturates(self):
        assert matfun.max_abs(matfun.mat_tanh(np.eye(2), 20.0) - np.eye(2)) < 1e-12

    def test_tanh_diagonal(self):
        out = matfun.mat_tanh(np.diag([1.0, 2.0]), 1.0)
        np.testing.assert_allclose(out, np.diag([np.tanh(1.0), np.tanh(2.0)]), rtol=1e-14)

    def test_coth_diagonal(self):
        out = matfun.mat_coth(np.diag([0.5, 3.0]), 0.7)
        np.testing.assert_allclose(out, np.diag(1.0 / np.tanh([0.35, 2.1])), rtol=1e-13)

    def test_tanh_needs_pd(self):
        with pytest.raises(InvalidInput):
            matfun.mat_tanh(np.diag([1.0, -1.0]), 1.0)

    def test_coth_needs_positive_argument(self):
        with pytest.raises(InvalidInput):
            matfun.mat_coth(np.eye(2), 0.0)

    @settings(max_examples=40, deadline=None)
    @given(spd())
    def test_tanh_limit(self, O):
        tau = 30.0 / np.linalg.eigvalsh(O)[0]
        assert matfun.max_abs(matfun.mat_tanh(O, tau) - np.eye(O.shape[0])) < 1e-10

    @settings(max_examples=40, deadline=None)
    @given(spd(), st.floats(0.0, 5.0))
    def test_tanh_eigen_oracle(self, O, tau):
        w, U = np.linalg.eigh(O)
        ref = (U * np.tanh(w * tau)) @ U.T
        assert matfun.max_abs(matfun.mat_tanh(O, tau) - ref) < 1e-12


class TestLyapunov:
    def test_scaled_identity(self):
        C = np.array([[2.0, 0.3], [0.3, 1.0]])
        np.testing.assert_allclose(matfun.solve_lyapunov(-0.5 * np.eye(2), C), C, atol=1e-15)

    def test_diagonal_closed_form(self):
        X = matfun.solve_lyapunov(np.diag([-1.0, -2.0]), [[2.0, 3.0], [3.0, 8.0]])
        np.testing.assert_allclose(X, [[1.0, 1.0], [1.0, 2.0]], atol=1e-14)

    def test_b_inv_against_quadrature(self):
        C = 3.1 * Q5.T @ Q5
        X = matfun.solve_lyapunov(M5, C)
        s = np.linspace(0.0, 50.0, 20_001)
        E = np.array([sla.expm(M5 * t) for t in s])
        ref = simpson(E @ C @ np.swapaxes(E, -1, -2), x=s, axis=0)
        np.testing.assert_allclose(X, ref, atol=1e-10)

    def test_unstable_rejected(self):
        with pytest.raises(StabilityViolation):
            matfun.solve_lyapunov(np.eye(2), np.eye(2))

    def test_singular_operator(self):
        # eigenvalues +1 and -1 sum to zero
        with pytest.raises(NoUniqueSolution):
            matfun.solve_lyapunov(np.diag([1.0, -1.0]), np.eye(2), require_stable=False)

    def test_non_hurwitz_but_solvable(self):
        X = matfun.solve_lyapunov(np.diag([1.0, 2.0]), np.eye(2), require_stable=False)
        assert matfun.lyapunov_residual(np.diag([1.0, 2.0]), X, np.eye(2)) < 1e-14

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 5).flatmap(lambda d: st.tuples(hurwitz(d), spd(d, shift=0.0))))
    def test_residual_symmetry_psd(self, AC):
        A, C = AC
        X = matfun.solve_lyapunov(A, C)
        assert matfun.lyapunov_residual(A, X, C) <= 1e-10 * (1.0 + matfun.max_abs(C)) * max(1.0, matfun.max_abs(X))
        np.testing.assert_array_equal(X, X.T)
        assert np.linalg.eigvalsh(X)[0] >= -1e-10 * max(1.0, matfun.max_abs(X))
        ref = sla.solve_continuous_lyapunov(A, -C)
        assert matfun.max_abs(X - ref) <= 1e-8 * max(1.0, matfun.max_abs(ref))

    def test_gramian_quadrature_matches_lyapunov(self):
        C = Q5.T @ Q5
        G = matfun.gramian_quadrature(M5, C, 40.0 / abs(matfun.spectral_abscissa(M5)))
        np.testing.assert_allclose(G, matfun.solve_lyapunov(M5, C), atol=1e-12)


class TestLoewner:
    def test_strictly_less(self):
        assert matfun.loewner_compare(np.zeros((2, 2)), np.eye(2), 1e-10) is LoewnerOrder.STRICTLY_LESS

    def test_equal(self):
        A = np.array([[1.0, 0.2], [0.2, 3.0]])
        assert matfun.loewner_compare(A, A) is LoewnerOrder.EQUAL

    def test_indefinite(self):
        assert matfun.loewner_compare(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) is LoewnerOrder.INDEFINITE

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            matfun.loewner_compare(np.eye(2), np.eye(3))

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda d: st.tuples(spd(d, 0.0), spd(d, 0.0))))
    def test_antisymmetry(self, AB):
        A, B = AB
        forward = matfun.loewner_compare(A, B)
        backward = matfun.loewner_compare(B, A)
        assert (forward is LoewnerOrder.STRICTLY_LESS) == (backward is LoewnerOrder.STRICTLY_GREATER)
        assert (forward is LoewnerOrder.EQUAL) == (backward is LoewnerOrder.EQUAL)

    def test_is_positive_definite(self):
        assert matfun.is_positive_definite(np.eye(2))
        assert not matfun.is_positive_definite(np.diag([1.0, 0.0]), 1e-10)
        assert matfun.is_positive_definite(np.array([[0.01, 0.005], [0.005, 0.02]]))


class TestSymmetry:
    def test_symmetrize_small_asymmetry(self):
        A = np.array([[1.0, 2.0 + 1e-13], [2.0, 1.0]])
        out = matfun.symmetrize(A)
        np.testing.assert_array_equal(out, out.T)

    def test_symmetrize_rejects(self):
        with pytest.raises(InvalidInput):
            matfun.symmetrize([[1.0, 2.0], [2.1, 1.0]])

    def test_psd_sqrt(self):
        A = np.array([[2.0, 0.5], [0.5, 1.0]])
        S = matfun.psd_sqrt(A)
        np.testing.assert_allclose(S @ S, A, atol=1e-14)

    def test_hurwitz_boundary(self):
        assert matfun.is_hurwitz(M5)
        assert not matfun.is_hurwitz(np.diag([-1.0, -1e-13]))
