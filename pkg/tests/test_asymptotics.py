from fractions import Fraction

import numpy as np
import pytest

from psigrad.asymptotics import component_profile, predicted_limits, zigzag_analysis
from psigrad.errors import AssumptionViolated, InsufficientIterates, ZeroConstant, ZeroGradient
from psigrad.oracles import quadratic_as_oracle
from psigrad.solver import StoppingRule, run
from psigrad.spectral import QuadraticProblem, SpectralWeight
from psigrad.stepsizes import PsiFamily, family_step

IDENTITY = SpectralWeight.identity()
INVERSE = SpectralWeight.power(-1)
N5 = QuadraticProblem.from_eigenvalues([1.0, 3.7, 18.0, 55.0, 100.0])


def _run(P, psi, x0, iters, gamma=1.0):
    return run(quadratic_as_oracle(P), PsiFamily(psi, gamma), x0, StoppingRule(0.0, iters))


class TestProfile:
    def test_example(self):
        P = QuadraticProblem.from_eigenvalues([1, 2])
        prof = component_profile(P, [3, 4], k=7)
        assert prof.k == 7
        np.testing.assert_allclose(prof.fractions, [9 / 25, 16 / 25], rtol=1e-15)

    def test_tiny_gradient_does_not_underflow(self):
        P = QuadraticProblem.from_eigenvalues([1, 2])
        np.testing.assert_allclose(component_profile(P, [3e-200, 4e-200]).fractions,
                                   [9 / 25, 16 / 25], rtol=1e-15)

    def test_zero_gradient(self):
        with pytest.raises(ZeroGradient):
            component_profile(QuadraticProblem.from_eigenvalues([1, 2]), [0, 0])


class TestLimits:
    def test_examples(self):
        even, odd = predicted_limits(1.0, IDENTITY, 1, 100, 2)
        np.testing.assert_array_equal(even, [0.5, 0.5])
        np.testing.assert_array_equal(odd, [0.5, 0.5])
        even, odd = predicted_limits(2.0, IDENTITY, 1, 100, 3)
        np.testing.assert_allclose(even, [0.2, 0, 0.8], rtol=1e-15)
        np.testing.assert_allclose(odd, [0.8, 0, 0.2], rtol=1e-15)
        _, odd = predicted_limits(1.0, INVERSE, 1, 100, 2)
        np.testing.assert_allclose(odd, [float(Fraction(1, 10001)), float(Fraction(10000, 10001))],
                                   rtol=1e-15)

    @pytest.mark.parametrize("psi", [IDENTITY, INVERSE, SpectralWeight.laurent({-1: 1.0, 1: 0.3})],
                             ids=lambda w: w.describe())
    @pytest.mark.parametrize("c", [0.2, -1.0, 3.5])
    def test_odd_limit_is_one_step_of_even_limit(self, psi, c):
        # a gradient (1, c) in the extreme plane maps to the odd limit in one step
        P = QuadraticProblem.from_eigenvalues([2.0, 30.0])
        g = np.array([1.0, c])
        a = family_step(P, psi, 1.0, g)
        g1 = (1 - a * P.eigenvalues) * g
        even, odd = predicted_limits(c, psi, P.mu, P.ell, 2)
        np.testing.assert_allclose(component_profile(P, g).fractions, even, rtol=1e-14)
        np.testing.assert_allclose(component_profile(P, g1).fractions, odd, rtol=1e-12)

    def test_rejections(self):
        with pytest.raises(ZeroConstant):
            predicted_limits(0.0, IDENTITY, 1, 2, 2)
        with pytest.raises(ValueError):
            predicted_limits(1.0, IDENTITY, 1, 2, 1)


class TestZigzag:
    @pytest.mark.parametrize("psi", [IDENTITY, INVERSE], ids=lambda w: w.describe())
    def test_random_start_on_five_eigenvalues(self, psi):
        rng = np.random.default_rng(42)
        tr = _run(N5, psi, N5.x_star + rng.standard_normal(5), 500)
        rep = zigzag_analysis(tr, N5, psi)
        assert max(rep.middle_mass_even, rep.middle_mass_odd) <= 1e-6
        assert rep.c_relative_gap <= 1e-4
        assert rep.predicted_vs_measured_max_err <= 1e-6
        assert set(rep.to_dict()) >= {"c_even", "c_odd", "even_limits", "odd_limits"}

    def test_two_dimensional_constant_is_exact(self):
        # in two dimensions the normalized gradient alternates from the first step
        P = QuadraticProblem.from_eigenvalues([1.0, 100.0])
        tr = _run(P, IDENTITY, [30.0, 1.0], 40)
        rep = zigzag_analysis(tr, P, IDENTITY)
        assert rep.c_even == pytest.approx(100 / 30, rel=1e-12)
        assert rep.c_relative_gap <= 1e-12

    def test_rejections(self):
        x0 = N5.x_star + 1.0
        with pytest.raises(AssumptionViolated):
            zigzag_analysis(_run(N5, IDENTITY, x0, 50, gamma=0.5), N5, IDENTITY)
        with pytest.raises(InsufficientIterates):
            zigzag_analysis(_run(N5, IDENTITY, x0, 4), N5, IDENTITY)
        R = QuadraticProblem.from_eigenvalues([1.0, 1.0, 4.0], relaxed=True)
        with pytest.raises(AssumptionViolated):
            zigzag_analysis(_run(R, IDENTITY, [1.0, 1.0, 1.0], 20), R, IDENTITY)
        with pytest.raises(AssumptionViolated):
            zigzag_analysis(_run(N5, IDENTITY, [0.0, 1.0, 1.0, 1.0, 1.0], 50), N5, IDENTITY)
