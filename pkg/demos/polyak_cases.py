"""
Polyak stepsize: two cases, one rate
====================================

The Polyak step lands in [gamma/L, gamma/mu].  Short steps (Case Two) and long
steps (Case One) need different certificates; both reproduce the weighted
family rate, and the per-step bound never exceeds it.
"""
import numpy as np

from psigrad import polyak_case1_certificate, polyak_case2_certificate, polyak_case_split, theoretical_rate

gamma, mu, ell = 1.0, 1.0, 100.0
print(f"global bound {theoretical_rate(mu, ell, gamma):.8f}")
for alpha in (0.01, 2 / 101, 0.05, 0.2, 0.5, 1.0):
    case = polyak_case_split(gamma, mu, ell, alpha)
    if case.name == "ONE":
        c = polyak_case1_certificate(gamma, mu, ell, alpha)
        print(f"alpha {alpha:.5f}: case One, zeta1 {c.zeta1:9.4f}, per-step bound {c.per_alpha_bound:.8f}")
    else:
        c = polyak_case2_certificate(gamma, mu, ell, alpha)
        print(f"alpha {alpha:.5f}: case Two, zeta1 {c.zeta1:9.6f}, bound {c.worst_bound:.8f}")

bounds = [polyak_case1_certificate(gamma, mu, ell, a).per_alpha_bound
          for a in np.linspace(2 / 101, 1.0, 200)]
print(f"largest case One bound over the long steps: {max(bounds):.8f}")
