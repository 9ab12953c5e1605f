import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psigrad.errors import (
    DimensionMismatch,
    InvalidSpectrum,
    NonPositiveWeight,
    ZeroGradient,
)
from psigrad.spectral import (
    QuadraticProblem,
    RelaxedSpectrum,
    SpectralWeight,
    Spectrum,
    eval_weight,
    kantorovich_bound,
    kantorovich_ratio,
    minimizer,
    quad_gap,
    quad_gradient,
    quad_value,
    weight_on,
    weighted_norm_sq,
)

P100 = QuadraticProblem.from_eigenvalues([1, 100])


def _random_problem(rng, n=5, mu=1.0, ell=100.0, with_b=True):
    inner = np.sort(rng.uniform(mu, ell, n - 2))
    b = rng.standard_normal(n) if with_b else None
    return QuadraticProblem.from_eigenvalues([mu, *inner, ell], b)


class TestSpectrum:
    def test_basic_properties(self):
        s = Spectrum((1.0, 3.7, 100.0))
        assert (s.n, s.mu, s.ell) == (3, 1.0, 100.0)
        assert s.condition_number == 100.0
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    @pytest.mark.parametrize("eigs", [(1.0,), (1.0, 1.0), (2.0, 1.0), (0.0, 1.0), (-1.0, 2.0),
                                      (1.0, math.inf), (1.0, math.nan)])
    def test_rejects_invalid(self, eigs):
        with pytest.raises(InvalidSpectrum):
            Spectrum(eigs)

    def test_relaxed_allows_ties(self):
        s = RelaxedSpectrum((1.0, 1.0, 2.0))
        assert s.n == 3
        with pytest.raises(InvalidSpectrum):
            RelaxedSpectrum((2.0, 1.0))

    def test_problem_b_length(self):
        with pytest.raises(DimensionMismatch):
            QuadraticProblem.from_eigenvalues([1, 2], [1, 2, 3])


class TestQuadratic:
    def test_value_examples(self):
        assert quad_value(P100, [30, 1]) == 500.0
        assert quad_value(P100, [0, 0]) == 0.0
        assert quad_value(QuadraticProblem.from_eigenvalues([2, 3], [2, 3]), [1, 1]) == -2.5

    def test_gradient_examples(self):
        np.testing.assert_array_equal(quad_gradient(P100, [30, 1]), [30, 100])
        P = QuadraticProblem.from_eigenvalues([2, 3], [2, 3])
        np.testing.assert_array_equal(quad_gradient(P, [0, 0]), [-2, -3])

    def test_gradient_vanishes_at_minimizer(self):
        P = _random_problem(np.random.default_rng(0))
        assert not np.any(quad_gradient(P, P.x_star))

    @pytest.mark.parametrize("eigs,b,x,f", [([1, 100], [0, 0], [0, 0], 0.0),
                                            ([2, 4], [2, 4], [1, 1], -3.0),
                                            ([1, 10], [1, 0], [1, 0], -0.5)])
    def test_minimizer_examples(self, eigs, b, x, f):
        xs, fs = minimizer(QuadraticProblem.from_eigenvalues(eigs, b))
        np.testing.assert_array_equal(xs, x)
        assert fs == f

    def test_value_above_optimum_and_gap_consistent(self):
        rng = np.random.default_rng(1)
        P = _random_problem(rng)
        for _ in range(100):
            x = P.x_star + rng.standard_normal(P.n)
            assert quad_value(P, x) >= P.f_star
            assert quad_gap(P, x) == pytest.approx(quad_value(P, x) - P.f_star, rel=1e-9)

    def test_dimension_checked(self):
        with pytest.raises(DimensionMismatch):
            quad_value(P100, [1, 2, 3])


class TestWeights:
    def test_evaluation_examples(self):
        assert eval_weight(SpectralWeight.identity(), 7) == 1.0
        assert eval_weight(SpectralWeight.power(-1), 4) == 0.25
        assert eval_weight(SpectralWeight.laurent({-1: 1, 1: 1}), 2) == 2.5

    def test_describe(self):
        assert SpectralWeight.identity().describe() == "identity"
        assert SpectralWeight.power(-1).describe() == "power(-1)"
        assert SpectralWeight.power(0).describe() == "identity"
        assert SpectralWeight.laurent({-1: 1.0, 2: 0.5}).describe() == "laurent(-1=1.0,2=0.5)"

    def test_non_positive_weight_rejected_on_binding(self):
        psi = SpectralWeight.laurent({0: 1.0, 1: -0.02})  # negative beyond z = 50
        with pytest.raises(NonPositiveWeight):
            weight_on(psi, P100.spectrum)
        with pytest.raises(NonPositiveWeight):
            SpectralWeight.laurent({0: 0.0})

    def test_non_integer_power_rejected(self):
        with pytest.raises(ValueError):
            SpectralWeight.power(0.5)


class TestNorms:
    def test_weighted_norm_examples(self):
        assert weighted_norm_sq(P100, SpectralWeight.identity(), [1, 1]) == 101.0
        assert weighted_norm_sq(P100, SpectralWeight.identity(), [0, 0]) == 0.0

    def test_inverse_weight_is_euclidean_and_identity_is_twice_gap(self):
        rng = np.random.default_rng(2)
        P = _random_problem(rng)
        for _ in range(50):
            e = rng.standard_normal(P.n)
            x = P.x_star + e
            assert weighted_norm_sq(P, SpectralWeight.power(-1), e) == pytest.approx(e @ e, rel=1e-14)
            assert weighted_norm_sq(P, SpectralWeight.identity(), e) == pytest.approx(
                2 * quad_gap(P, x), rel=1e-14)


class TestKantorovich:
    def test_bound_exact(self):
        assert kantorovich_bound(1, 100) == float(Fraction(400, 10201))

    def test_balanced_gradients_attain_bound(self):
        bound = float(Fraction(400, 10201))
        assert kantorovich_ratio(P100, SpectralWeight.identity(), [1, 1]) == pytest.approx(bound, rel=1e-14)
        assert kantorovich_ratio(P100, SpectralWeight.power(-1), [1, 10]) == pytest.approx(bound, rel=1e-14)

    def test_eigenvector_gives_one(self):
        for psi in (SpectralWeight.identity(), SpectralWeight.power(-1)):
            assert kantorovich_ratio(P100, psi, [0, 3]) == pytest.approx(1.0, rel=1e-15)

    def test_zero_gradient(self):
        with pytest.raises(ZeroGradient):
            kantorovich_ratio(P100, SpectralWeight.identity(), [0, 0])

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5),
           st.sampled_from([-2, -1, 0, 1, 2]),
           st.integers(-20, 20))
    def test_bounds_and_power_of_two_scale_invariance(self, g, p, e):
        P = QuadraticProblem.from_eigenvalues([1.0, 2.5, 9.0, 40.0, 100.0])
        g = np.asarray(g)
        if not np.any(g):
            return
        psi = SpectralWeight.power(p)
        k = kantorovich_ratio(P, psi, g)
        assert kantorovich_bound(P.mu, P.ell) - 1e-12 <= k <= 1 + 1e-12
        # scaling by a power of two is exact in binary floating point
        assert kantorovich_ratio(P, psi.scaled(2.0 ** e), g) == k

    def test_general_scale_invariance_to_rounding(self):
        rng = np.random.default_rng(3)
        P = _random_problem(rng)
        psi = SpectralWeight.laurent({-1: 1.0, 1: 0.01})
        for c in (0.3, 7.0, 1e5):
            g = rng.standard_normal(P.n)
            assert kantorovich_ratio(P, psi.scaled(c), g) == pytest.approx(
                kantorovich_ratio(P, psi, g), rel=1e-14)
