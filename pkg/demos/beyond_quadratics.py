"""
Beyond quadratics: a log-sum-exp ridge problem
==============================================

The exact line search and Polyak rates hold on any smooth strongly convex
function.  The bundled log-sum-exp fixture checks this numerically, with the
line search done by a bracketed root find.
"""
import numpy as np

from psigrad import ExactLineSearchNumeric, PolyakGeneral, StoppingRule, check_general_rate, run
from psigrad import io

oracle, _ = io.load_oracle("lse_ridge")
print(f"mu = {oracle.mu}, L = {oracle.ell:.10f}")
rng = np.random.default_rng(42)
x0 = oracle.optimal_point + 3 * rng.standard_normal(oracle.dim)
for rule in (ExactLineSearchNumeric(), PolyakGeneral()):
    tr = run(oracle, rule, x0, StoppingRule(1e-10, 1000))
    rc = check_general_rate(tr, oracle, rule)
    print(f"{str(rule):30s} {tr.iterations:4d} iterations, worst ratio {max(rc.observed):.6f} "
          f"<= {rc.theoretical:.6f} ({rc.metric})")
