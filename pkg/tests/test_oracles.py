import numpy as np
import pytest
from mpmath import mp, mpf
from mpmath import exp as mexp
from mpmath import log as mlog

from psigrad import io
from psigrad.errors import DegenerateClass, DegenerateRows, DimensionMismatch, InvalidClass, InvalidSpectrum
from psigrad.oracles import (
    SmoothStronglyConvexOracle,
    dense_quadratic_oracle,
    interpolation_residual,
    lse_ridge_oracle,
    power_iteration_sigma_max,
    quadratic_as_oracle,
)
from psigrad.spectral import QuadraticProblem


@pytest.fixture(scope="module")
def lse():
    return io.load_oracle("lse_ridge")[0]


def _lse_value_mp(oracle, x):
    """Objective at ``x`` in 50-digit arithmetic."""
    p = oracle.params
    with mp.workdps(50):
        rows = [[mpf(v) for v in r] for r in p["rows"]]
        tau, mu0 = mpf(p["tau"]), mpf(p["mu0"])
        xs = [mpf(float(v)) for v in x]
        z = [sum(a * b for a, b in zip(r, xs)) / tau for r in rows]
        m = max(z)
        lse = m + mlog(sum(mexp(v - m) for v in z))
        d = [a - mpf(b) for a, b in zip(xs, p["anchor"])]
        return tau * lse + mu0 / 2 * sum(v * v for v in d)


class TestQuadraticOracle:
    def test_examples(self):
        O = quadratic_as_oracle(QuadraticProblem.from_eigenvalues([1, 100]))
        assert (O.mu, O.ell, O.optimal_value) == (1.0, 100.0, 0.0)
        O = quadratic_as_oracle(QuadraticProblem.from_eigenvalues([2, 3], [2, 3]))
        assert (O.mu, O.ell) == (2.0, 3.0)
        np.testing.assert_array_equal(O.optimal_point, [1, 1])

    def test_one_dimensional_rejected(self):
        with pytest.raises(InvalidSpectrum):
            QuadraticProblem.from_eigenvalues([1.0])

    def test_constants_tight_along_extreme_eigenvectors(self):
        P = QuadraticProblem.from_eigenvalues([1.0, 5.0, 100.0], [1, -1, 2])
        O = quadratic_as_oracle(P)
        x = P.x_star
        for i, lam in ((0, O.mu), (2, O.ell)):
            e = np.zeros(3)
            e[i] = 0.7
            assert O.f_gap(x + e) == pytest.approx(0.5 * lam * 0.49, rel=1e-14)

    def test_dense_matches_spectral(self):
        rng = np.random.default_rng(0)
        P = QuadraticProblem.from_eigenvalues([1.0, 4.0, 9.0, 30.0], rng.standard_normal(4))
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        D = dense_quadratic_oracle(P, Q)
        S = quadratic_as_oracle(P)
        for _ in range(20):
            y = rng.standard_normal(4)
            x = Q @ y
            assert D.value(x) == pytest.approx(S.value(y), rel=1e-12, abs=1e-12)
            np.testing.assert_allclose(Q.T @ D.gradient(x), S.gradient(y), rtol=1e-11, atol=1e-11)
        with pytest.raises(ValueError):
            dense_quadratic_oracle(P, 2 * Q)

    def test_class_validation(self):
        with pytest.raises(InvalidClass):
            SmoothStronglyConvexOracle(lambda x: 0.0, lambda x: x, mu=2.0, ell=1.0, dim=2)
        with pytest.raises(InvalidClass):
            SmoothStronglyConvexOracle(lambda x: 0.0, lambda x: x, mu=0.0, ell=1.0, dim=2)


class TestLseRidge:
    def test_constants(self, lse):
        rows = np.asarray(lse.params["rows"])
        sigma = np.linalg.norm(rows, 2)
        assert lse.mu == 0.05
        assert lse.ell == pytest.approx(0.05 + sigma ** 2 / 0.5, rel=1e-12)
        assert power_iteration_sigma_max(rows) == pytest.approx(sigma, rel=1e-12)

    def test_minimizer_is_stationary(self, lse):
        assert np.linalg.norm(lse.gradient(lse.optimal_point)) <= 1e-14
        assert lse.f_gap(lse.optimal_point) == 0.0

    def test_gap_against_high_precision(self, lse):
        rng = np.random.default_rng(1)
        f_star = _lse_value_mp(lse, lse.optimal_point)
        for scale in (1.0, 1e-3, 1e-6):
            x = lse.optimal_point + scale * rng.standard_normal(lse.dim)
            exact = float(_lse_value_mp(lse, x) - f_star)
            assert lse.f_gap(x) == pytest.approx(exact, rel=1e-8)

    def test_gradient_central_differences(self, lse):
        rng = np.random.default_rng(2)
        h = 1e-5
        for _ in range(100):
            x = lse.optimal_point + rng.standard_normal(lse.dim)
            e = rng.standard_normal(lse.dim)
            fd = (lse.value(x + h * e) - lse.value(x - h * e)) / (2 * h)
            assert abs(fd - lse.gradient(x) @ e) <= 1e-6 * max(1.0, abs(fd))

    def test_symmetric_rows_stationary_at_anchor(self):
        a = np.array([1.0, -2.0, 0.5])
        O = lse_ridge_oracle(np.vstack([a, -a]), 0.3, 1.0, np.zeros(3))
        np.testing.assert_allclose(O.gradient(np.zeros(3)), 0.0, atol=1e-15)
        np.testing.assert_allclose(O.optimal_point, 0.0, atol=1e-14)

    def test_rejections(self):
        with pytest.raises(DegenerateRows):
            lse_ridge_oracle(np.zeros((3, 2)), 1.0, 1.0, np.zeros(2))
        with pytest.raises(DimensionMismatch):
            lse_ridge_oracle(np.ones((3, 2)), 1.0, 1.0, np.zeros(3))
        with pytest.raises(InvalidClass):
            lse_ridge_oracle(np.ones((3, 2)), 0.0, 1.0, np.zeros(2))


class TestInterpolation:
    def test_same_point(self, lse):
        x = lse.optimal_point + 1.0
        assert interpolation_residual(lse, x, x).value == 0.0

    def test_scripted_example(self):
        O = quadratic_as_oracle(QuadraticProblem.from_eigenvalues([1, 100]))
        # f(x) - f(y) + g_x'(y - x) + (mu|dx|^2 - 2mu/L dg'dx + |dg|^2/L) / (2(1 - mu/L))
        # with dx = (1, 0), dg = (1, 0): 0.5 - 1 + (1 - 0.02 + 0.01) / 1.98 = 0
        assert interpolation_residual(O, [1, 0], [0, 0]).value == pytest.approx(0.0, abs=1e-15)

    def test_random_quadratics(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            mu = 10 ** rng.uniform(-1, 1)
            ell = mu * 10 ** rng.uniform(0.1, 3)
            inner = np.sort(rng.uniform(mu, ell, 3))
            O = quadratic_as_oracle(QuadraticProblem.from_eigenvalues([mu, *inner, ell]))
            for _ in range(50):
                x, y = rng.standard_normal((2, 5))
                assert interpolation_residual(O, x, y).value <= 1e-12

    def test_detects_wrong_constants(self, lse):
        # claiming a larger mu than the function has must be caught
        fake = SmoothStronglyConvexOracle(lse.value, lse.gradient, mu=0.5, ell=lse.ell, dim=lse.dim,
                                          optimal_value=lse.optimal_value)
        rng = np.random.default_rng(4)
        worst = max(interpolation_residual(fake, *(fake_pt for fake_pt in rng.standard_normal((2, 5))))
                    .value for _ in range(200))
        assert worst > 1e-6

    def test_degenerate_class(self):
        O = SmoothStronglyConvexOracle(lambda x: 0.5 * x @ x, lambda x: x, 1.0, 1.0, 2)
        with pytest.raises(DegenerateClass):
            interpolation_residual(O, [1, 0], [0, 1])
