"""
Asymptotic zigzag
=================

With gamma = 1 the gradient direction settles into a two-cycle inside the span
of the extreme eigenvectors.  The middle components die out and the limiting
fractions follow from a single constant c.
"""
import numpy as np

from psigrad import PsiFamily, QuadraticProblem, SpectralWeight, StoppingRule, quadratic_as_oracle, run
from psigrad.asymptotics import zigzag_analysis

P = QuadraticProblem.from_eigenvalues([1.0, 3.7, 18.0, 55.0, 100.0])
rng = np.random.default_rng(42)
x0 = P.x_star + rng.standard_normal(P.n)
np.set_printoptions(precision=6, suppress=True)
for psi in (SpectralWeight.identity(), SpectralWeight.power(-1)):
    tr = run(quadratic_as_oracle(P), PsiFamily(psi), x0, StoppingRule(0.0, 1000))
    rep = zigzag_analysis(tr, P, psi)
    print(psi.describe())
    print(f"  c from even iterates {rep.c_even:.10f}, from odd iterates {rep.c_odd:.10f}")
    print(f"  even limits {rep.even_limits}  measured {rep.measured_even}")
    print(f"  odd limits  {rep.odd_limits}  measured {rep.measured_odd}")
