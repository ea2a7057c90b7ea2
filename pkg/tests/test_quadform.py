import numpy as np
import pytest

from repliscan import (
    BondPortfolio,
    QuadraticForm,
    assemble,
    evaluate,
    portfolio_mismatch_risk,
    solve,
)
from repliscan.quadform import basis_portfolio

from .conftest import combined_se

THREE_BONDS = BondPortfolio([(1.0, 2.0), (0.5, 5.0), (1.5, 8.0)])


@pytest.fixture(scope="module")
def assembled(fig1_params, sim10k):
    return assemble(fig1_params, THREE_BONDS, [2.0, 5.0, 8.0], sim10k)


class TestAssemble:
    def test_symmetry_and_conditioning(self, assembled):
        np.testing.assert_allclose(assembled.A, assembled.A.T, rtol=1e-12)
        n = assembled.basis_labels.size
        floor = -1e-10 * np.trace(assembled.A) / n
        assert np.linalg.eigvalsh(assembled.A).min() >= floor
        assert assembled.C >= 0.0

    def test_exact_recovery_of_representable_exposure(self, assembled):
        solution = solve(assembled)
        np.testing.assert_allclose(solution.beta, [1.0, 0.5, 1.5], rtol=1e-8)
        assert solution.value <= 1e-10 * assembled.C
        assert not solution.regularized

    def test_zero_exposure(self, fig1_params, sim10k):
        zero = BondPortfolio([(0.0, 2.0), (0.0, 5.0), (0.0, 8.0)])
        form = assemble(fig1_params, zero, [3.0, 6.0], sim10k)
        assert np.all(form.B == 0.0) and form.C == 0.0
        solution = solve(form)
        np.testing.assert_array_equal(solution.beta, [0.0, 0.0])

    def test_single_basis_against_nominal_grid_search(self, fig1_params, sim10k):
        # 1-d search over candidate nominals, evaluated by the direct
        # Monte-Carlo mismatch on the same path set
        form = assemble(fig1_params, THREE_BONDS, [5.0], sim10k)
        best = form.C - form.B[0] ** 2 / form.A[0, 0]
        beta_star = form.B[0] / form.A[0, 0]
        grid = beta_star + np.linspace(-0.5, 0.5, 21)
        direct = [
            portfolio_mismatch_risk(fig1_params, THREE_BONDS, BondPortfolio([(c, 5.0)]), sim10k).mean
            for c in grid
        ]
        # grid resolution limits agreement: F(c) - F(best) <= A11 (dc/2)^2
        resolution = form.A[0, 0] * (0.5 * (grid[1] - grid[0])) ** 2
        assert min(direct) == pytest.approx(best, abs=resolution + 1e-12)

    def test_rejects_duplicate_basis(self, fig1_params, sim10k):
        with pytest.raises(ValueError):
            assemble(fig1_params, THREE_BONDS, [3.0, 3.0], sim10k)


class TestSolve:
    def test_identity_matrix(self):
        form = QuadraticForm(A=np.eye(3), B=np.array([1.0, -2.0, 0.5]), C=9.0,
                             basis_labels=np.array([2.0, 3.0, 4.0]))
        np.testing.assert_allclose(solve(form).beta, [1.0, -2.0, 0.5], rtol=1e-14)

    def test_hand_checkable_two_by_two(self):
        form = QuadraticForm(A=np.array([[2.0, 1.0], [1.0, 2.0]]), B=np.array([3.0, 3.0]),
                             C=3.0, basis_labels=np.array([2.0, 3.0]))
        solution = solve(form)
        np.testing.assert_allclose(solution.beta, [1.0, 1.0], rtol=1e-14)
        assert solution.condition_estimate >= 1.0

    def test_near_singular_basis_against_eigendecomposition_oracle(self, fig1_params, sim10k):
        form = assemble(fig1_params, THREE_BONDS, [5.0, 5.01], sim10k)
        solution = solve(form)
        # eigendecomposition pseudo-inverse as the reference optimum
        w, v = np.linalg.eigh(form.A)
        keep = w > 1e-14 * w.max()
        beta_eig = v[:, keep] @ ((v[:, keep].T @ form.B) / w[keep])
        f_eig = evaluate(form, beta_eig)
        assert abs(solution.value - f_eig) <= 1e-8 * form.C
        assert solution.condition_estimate > 1e4  # near-duplicate pair is ill-conditioned

    def test_exactly_singular_matrix_uses_ridge_fallback(self):
        form = QuadraticForm(A=np.array([[1.0, 1.0], [1.0, 1.0]]), B=np.array([1.0, 1.0]),
                             C=1.0, basis_labels=np.array([2.0, 3.0]))
        solution = solve(form)
        assert solution.regularized
        np.testing.assert_allclose(solution.beta, [0.5, 0.5], rtol=1e-6)
        assert solution.value == pytest.approx(0.0, abs=1e-9)

    def test_singular_matrix_errors_after_fallback(self):
        form = QuadraticForm(A=np.zeros((2, 2)), B=np.array([1.0, 1.0]), C=1.0,
                             basis_labels=np.array([2.0, 3.0]))
        with pytest.raises(ValueError):
            solve(form)


class TestEvaluate:
    def test_zero_weights_give_constant(self, assembled):
        assert evaluate(assembled, np.zeros(3)) == assembled.C

    def test_first_order_condition(self, assembled):
        solution = solve(assembled)
        expected = assembled.C - assembled.B @ solution.beta
        assert solution.value == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_matches_direct_monte_carlo_exactly(self, fig1_params, sim10k, assembled):
        # same path set on both routes: agreement to roundoff, not just 3 SE
        beta = np.array([0.7, 0.2, 0.9])
        direct = portfolio_mismatch_risk(
            fig1_params, THREE_BONDS, basis_portfolio(assembled, beta), sim10k
        )
        value = evaluate(assembled, beta)
        assert value == pytest.approx(direct.mean, rel=1e-10)
        assert abs(value - direct.mean) < 3 * combined_se(direct.std_error) + 1e-12

    def test_optimality_against_random_weights(self, assembled):
        solution = solve(assembled)
        rng = np.random.default_rng(23)
        for _ in range(100):
            beta = solution.beta + rng.standard_normal(3)
            assert solution.value <= evaluate(assembled, beta) + 1e-12

    def test_rejects_dimension_mismatch(self, assembled):
        with pytest.raises(ValueError):
            evaluate(assembled, np.array([1.0, 2.0]))
