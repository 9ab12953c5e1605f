"""Root finding on the directional derivative along the negative gradient."""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure

MAX_EVALS = 400


class _Found(Exception):
    pass


def exact_step(gradient: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                         g: np.ndarray, mu: float, ell: float, tol: float) -> float:
    """Minimizer of ``alpha -> f(x - alpha g)`` for ``f`` in F_{mu,L}.

    The root of ``phi'(alpha) = -g^T grad f(x - alpha g)`` lies in
    ``[1/L, 1/mu]``; sign changes are accepted on the wider interval
    ``[1/(2L), 2/mu]`` before declaring the class constants wrong.  The
    bracket is refined by Brent's method, stopping as soon as
    ``|phi'| <= tol * ||g||^2`` or the bracket reaches machine precision.
    The returned step is the probe with the smallest ``|phi'|``.
    """
    gg = float(np.dot(g, g))
    target = tol * gg
    best = [np.inf, None]

    def dphi(a):
        d = -float(np.dot(g, gradient(x - a * g)))
        if abs(d) < best[0]:
            best[0], best[1] = abs(d), a
        if abs(d) <= target:
            raise _Found
        return d

    try:
        lo, hi = 1.0 / ell, 1.0 / mu
        d_lo, d_hi = dphi(lo), dphi(hi)
        if d_lo > 0:
            lo, hi = 0.5 / ell, lo
            if dphi(lo) > 0:
                raise BracketFailure(f"phi' > 0 already at alpha = 1/(2L) = {lo:g}")
        elif d_hi < 0:
            lo, hi = hi, 2.0 / mu
            if dphi(hi) < 0:
                raise BracketFailure(f"phi' < 0 still at alpha = 2/mu = {hi:g}")
        brentq(dphi, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
               maxiter=MAX_EVALS, disp=False)
    except _Found:
        pass
    return float(best[1])
