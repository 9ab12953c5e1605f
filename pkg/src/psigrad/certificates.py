"""Numerical certificates for the convergence rates of the weighted family.

Three groups of checks live here:

* rate checks on traces against ``1 - 4 gamma (2 - gamma) mu L / (L + mu)^2``;
* the multiplier system behind the exact line-search rate on F_{mu,L}
  (zeta/beta/delta parameters, their identities, and the completed-square
  decomposition of the one-step bound);
* the two-case multiplier construction behind the Polyak rate.

Identity residuals are relative: each residual is divided by the largest
magnitude among the terms that sum to it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    InvalidClass,
    MetricUnavailable,
    OrthogonalityViolated,
    RuleMismatch,
    StepOutOfRange,
    WrongCase,
)
from .oracles import SmoothStronglyConvexOracle
from .solver import Metric, Trace, contraction_series
from .spectral import QuadraticProblem, RelaxedSpectrum, SpectralWeight, weight_on
from .stepsizes import ExactLineSearchNumeric, PolyakGeneral, PsiFamily, StepsizeRule

__all__ = [
    "RateCheck",
    "ElsProofCertificate",
    "PolyakCase",
    "PolyakProofCertificate",
    "theoretical_rate",
    "els_rate",
    "worst_case_start",
    "check_quadratic_rate",
    "check_general_rate",
    "els_certificate",
    "els_proof_parameters",
    "els_residual_decomposition",
    "polyak_case_threshold",
    "polyak_case_split",
    "polyak_case1_bound",
    "polyak_case1_certificate",
    "polyak_case2_h",
    "polyak_case2_certificate",
    "polyak_case2_minimizer",
]

EQUALITY_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-8


def _check_class(mu: float, ell: float) -> None:
    if not (math.isfinite(mu) and math.isfinite(ell) and 0 < mu < ell):
        raise InvalidClass(f"need 0 < mu < L, got mu={mu}, L={ell}")


def _check_gamma(gamma: float) -> None:
    if not 0 < gamma <= 1:
        raise InvalidClass(f"gamma must lie in (0, 1], got {gamma}")


def _relative(*terms: float) -> float:
    scale = max(abs(t) for t in terms)
    return abs(math.fsum(terms)) / scale if scale > 0 else 0.0


def theoretical_rate(mu: float, ell: float, gamma: float = 1.0) -> float:
    _check_class(mu, ell)
    _check_gamma(gamma)
    return 1.0 - 4.0 * gamma * (2.0 - gamma) * mu * ell / (ell + mu) ** 2


def els_rate(mu: float, ell: float) -> float:
    """``((L - mu) / (L + mu))^2``, the gamma = 1 value of :func:`theoretical_rate`."""
    _check_class(mu, ell)
    return ((ell - mu) / (ell + mu)) ** 2


# --------------------------------------------------------------------------
# quadratic rate checks


@dataclass(frozen=True)
class RateCheck:
    theoretical: float
    observed: list[float]
    max_violation: float
    equality_case: bool
    metric: str = ""

    def to_dict(self) -> dict:
        return {
            "theoretical": self.theoretical,
            "observed_min": min(self.observed, default=None),
            "observed_max": max(self.observed, default=None),
            "n_ratios": len(self.observed),
            "max_violation": self.max_violation,
            "equality_case": self.equality_case,
            "metric": self.metric,
        }


def _rate_check(theoretical: float, observed: list[float], metric: Metric) -> RateCheck:
    if observed:
        viol = max(o - theoretical for o in observed)
        eq = all(abs(o - theoretical) <= EQUALITY_TOL for o in observed)
    else:
        viol, eq = -math.inf, False
    return RateCheck(theoretical, observed, viol, eq, metric.value)


def _require_strict(P: QuadraticProblem) -> None:
    if isinstance(P.spectrum, RelaxedSpectrum):
        raise InvalidClass("certificates need a strictly increasing spectrum")


def worst_case_start(P: QuadraticProblem, psi: SpectralWeight, sign: int = 1) -> np.ndarray:
    """``A^{-1}(psi(A)^{-1/2}(xi_1 +/- xi_n)/sqrt(2) + b)``.

    The gradient there is balanced between the extreme eigenvectors in the
    psi-weighted sense, which makes the next family step attain the rate
    bound with equality.
    """
    _require_strict(P)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    w = weight_on(psi, P.spectrum)
    g = np.zeros(P.n)
    g[0] = 1.0 / math.sqrt(2.0 * w[0])
    g[-1] = sign / math.sqrt(2.0 * w[-1])
    return (g + P.b_vector) / P.eigenvalues


def check_quadratic_rate(trace: Trace, P: QuadraticProblem, psi: SpectralWeight,
                         gamma: float) -> RateCheck:
    _require_strict(P)
    if any(r.weighted_dist_sq is None for r in trace.records):
        raise MetricUnavailable("weighted_dist_sq was not recorded")
    theo = theoretical_rate(P.mu, P.ell, gamma)
    return _rate_check(theo, contraction_series(trace, Metric.WEIGHTED_DIST_SQ),
                       Metric.WEIGHTED_DIST_SQ)


def check_general_rate(trace: Trace, oracle: SmoothStronglyConvexOracle,
                       rule: StepsizeRule) -> RateCheck:
    """Per-iteration ratios against the matching worst-case bound.

    Exact line search is checked on the f-gap with ``((L-mu)/(L+mu))^2``,
    the Polyak rule on the squared distance with :func:`theoretical_rate`.
    Family rules on quadratic oracles fall back to
    :func:`check_quadratic_rate`.
    """
    if trace.rule != rule:
        raise RuleMismatch(f"trace was produced by {trace.rule}, not {rule}")
    if isinstance(rule, PsiFamily):
        if oracle.problem is None:
            raise RuleMismatch("family rules are only certified on quadratic problems")
        return check_quadratic_rate(trace, oracle.problem, rule.psi, rule.gamma)
    if isinstance(rule, ExactLineSearchNumeric):
        if rule.gamma != 1.0:
            raise RuleMismatch("the exact line-search bound assumes unshortened steps")
        return _rate_check(els_rate(oracle.mu, oracle.ell),
                           contraction_series(trace, Metric.FGAP), Metric.FGAP)
    if isinstance(rule, PolyakGeneral):
        return _rate_check(theoretical_rate(oracle.mu, oracle.ell, rule.gamma),
                           contraction_series(trace, Metric.DIST_SQ), Metric.DIST_SQ)
    raise RuleMismatch(f"no rate certificate for {rule!r}")


# --------------------------------------------------------------------------
# exact line search on F_{mu,L}


@dataclass(frozen=True)
class ElsProofCertificate:
    mu: float
    ell: float
    zeta1: float
    zeta2: float
    zeta3: float
    delta: float
    beta1: float
    beta2: float
    beta3: float
    beta4: float
    beta5: float
    identity_residuals: dict[str, float] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.identity_residuals.values())

    @property
    def rate(self) -> float:
        """Contraction factor implied by the multipliers."""
        return (self.zeta1 - self.zeta2) / (self.zeta1 + self.zeta3)

    def to_dict(self) -> dict:
        keys = ("mu", "ell", "zeta1", "zeta2", "zeta3", "delta",
                "beta1", "beta2", "beta3", "beta4", "beta5")
        out = {k: getattr(self, k) for k in keys}
        out["identity_residuals"] = dict(self.identity_residuals)
        return out


def els_certificate(mu: float, ell: float, zeta1: float, zeta2: float, zeta3: float,
                    delta: float | None = None) -> ElsProofCertificate:
    """Evaluate the beta coefficients and identity residuals for given multipliers.

    ``delta`` defaults to ``zeta1 / (L (zeta1 + zeta2))``.  Residual names:

    ``els_identity_beta2``, ``els_identity_beta3``
        the leftover ``||g_k||^2`` and ``||g_{k+1}||^2`` coefficients;
    ``els_square1_xi1``, ``els_square1_xin``, ``els_square2_xi1``, ``els_square2_xin``
        vanishing of both completed squares along the extreme eigenvectors
        of the two-dimensional worst case.
    """
    _check_class(mu, ell)
    L = ell
    s12 = zeta1 + zeta2
    if delta is None:
        delta = zeta1 / (L * s12)
    # mu (z1 + z3) - mu z1^2/(z1 + z2), regrouped to avoid cancellation when z1 >> z2, z3
    beta1 = mu * (zeta1 * zeta2 + zeta1 * zeta3 + zeta2 * zeta3) / s12
    beta2 = (L - mu) * (mu * zeta1 ** 2 - L * zeta2 ** 2) / (mu * L ** 2 * s12)
    beta3 = (zeta1 + zeta3) / L - mu * s12 * delta ** 2
    beta4 = (L - mu) * zeta1 * zeta2 / (L * s12)
    beta5 = mu * delta * zeta2 - zeta3

    # 1 - 2 mu/(L+mu) and 1 - 2L/(L+mu)
    c_mu = (L - mu) / (L + mu)
    c_L = (mu - L) / (L + mu)
    frac = zeta1 / s12
    gcoef = (mu * zeta1 + L * zeta2) / (mu * L * s12)

    # beta2 is itself a difference that cancels for L ~ mu; its two parts are
    # the terms that set the scale of this identity
    b2_scale = (L - mu) / (mu * L ** 2 * s12)
    res = {
        "els_identity_beta2": _relative(b2_scale * mu * zeta1 ** 2, -b2_scale * L * zeta2 ** 2,
                                        -beta4 ** 2 / beta1),
        "els_identity_beta3": _relative(beta3, -beta5 ** 2 / beta1),
        "els_square1_xi1": _relative(1 / mu, -(frac / mu + delta) * c_mu, -gcoef),
        "els_square1_xin": _relative(1 / L, -(frac / L + delta) * c_L, -gcoef),
        "els_square2_xi1": _relative((beta1 / mu) * c_mu, beta5 * c_mu, -beta4),
        "els_square2_xin": _relative((beta1 / L) * c_L, beta5 * c_L, -beta4),
    }
    return ElsProofCertificate(mu, ell, zeta1, zeta2, zeta3, delta,
                               beta1, beta2, beta3, beta4, beta5, res)


def els_proof_parameters(mu: float, ell: float, normalization: str = "zeta3") -> ElsProofCertificate:
    """Multipliers certifying ``f_{k+1} - f_* <= ((L-mu)/(L+mu))^2 (f_k - f_*)``.

    ``normalization="zeta3"`` fixes ``zeta3 = 1``; ``"sum13"`` fixes
    ``zeta1 + zeta3 = 1``.  Both describe the same certificate up to scale.
    """
    _check_class(mu, ell)
    L = ell
    if normalization == "zeta3":
        z1, z2, z3 = (L - mu) / (2 * mu), (L - mu) / (L + mu), 1.0
    elif normalization == "sum13":
        z1 = (L - mu) / (L + mu)
        z2 = 2 * mu * (L - mu) / (L + mu) ** 2
        z3 = 2 * mu / (L + mu)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    delta = (L + mu) / (L * (L + 3 * mu))
    return els_certificate(mu, ell, z1, z2, z3, delta)


def els_residual_decomposition(mu: float, ell: float, x_k, x_next, g_k, g_next, x_star,
                               fgap_k: float, fgap_next: float) -> tuple[float, float, float]:
    """Completed-square form of the one-step exact line-search bound.

    Returns ``(bound_slack, square1, square2)`` where

        bound_slack = fgap_next - r fgap_k + c1 square1 + c2 square2,

    ``r = ((L-mu)/(L+mu))^2``, ``c1 = mu L (L+3mu) / (2 (L+mu)^2)`` and
    ``c2 = 2 mu^2 L / ((L-mu)(L+3mu))``.  Whenever ``g_{k+1}`` is orthogonal
    to ``g_k`` the slack equals the multiplier-weighted sum of three
    interpolation residuals divided by ``zeta1 + zeta3``, hence is
    nonpositive on F_{mu,L}; the squares vanish on the two-dimensional
    worst case.
    """
    _check_class(mu, ell)
    L = ell
    x_k, x_next, g_k, g_next, x_star = (np.asarray(v, dtype=float)
                                        for v in (x_k, x_next, g_k, g_next, x_star))
    ortho = abs(float(g_next @ g_k))
    if ortho > ORTHOGONALITY_TOL * np.linalg.norm(g_k) * np.linalg.norm(g_next):
        raise OrthogonalityViolated(
            f"|g_(k+1)' g_k| = {ortho:.3e}: the step is not an exact line search")
    ek, en = x_k - x_star, x_next - x_star
    q = L + 3 * mu
    v1 = ek - (L + mu) / q * en - (3 * L + mu) / (L * q) * g_k - (L + mu) / (L * q) * g_next
    v2 = en - (L - mu) ** 2 / (2 * mu * L * (L + mu)) * g_k - (L + mu) / (2 * mu * L) * g_next
    sq1, sq2 = float(v1 @ v1), float(v2 @ v2)
    c1 = mu * L * q / (2 * (L + mu) ** 2)
    c2 = 2 * mu * mu * L / ((L - mu) * q)
    slack = fgap_next - els_rate(mu, ell) * fgap_k + c1 * sq1 + c2 * sq2
    return float(slack), sq1, sq2


# --------------------------------------------------------------------------
# Polyak stepsize on F_{mu,L}


class PolyakCase(enum.Enum):
    ONE = "One"
    TWO = "Two"


@dataclass(frozen=True)
class PolyakProofCertificate:
    """Multipliers for one Polyak step.

    ``per_alpha_bound`` is the contraction certified at the step actually
    taken; ``worst_alpha``/``worst_bound`` give the step at which the bound
    is weakest and the resulting class-wide rate.
    """

    case: PolyakCase
    gamma: float
    mu: float
    ell: float
    alpha: float
    zeta1: float
    zeta2: float
    zeta3: float
    beta: float
    sigma: float
    per_alpha_bound: float
    worst_alpha: float
    worst_bound: float
    condition_residual: float

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "gamma", "mu", "ell", "alpha", "zeta1", "zeta2", "zeta3", "beta", "sigma",
            "per_alpha_bound", "worst_alpha", "worst_bound", "condition_residual")}
        out["case"] = self.case.value
        return out


def polyak_case_threshold(gamma: float, mu: float, ell: float) -> float:
    """Largest Case-Two step: ``gamma / (L - mu + gamma mu)``.

    ``gamma (1 - mu alpha) - (L - mu) alpha >= 0`` is equivalent to
    ``alpha <= threshold``; comparing against the threshold avoids rounding
    noise exactly at the boundary.
    """
    return gamma / (ell - mu + gamma * mu)


def _check_alpha(gamma, mu, ell, alpha):
    lo, hi = gamma / ell, gamma / mu
    slack = 1e-12 * hi
    if not (lo - slack <= alpha <= hi + slack):
        raise StepOutOfRange(f"alpha = {alpha} outside [gamma/L, gamma/mu] = [{lo}, {hi}]")


def polyak_case_split(gamma: float, mu: float, ell: float, alpha: float) -> PolyakCase:
    _check_class(mu, ell)
    _check_gamma(gamma)
    _check_alpha(gamma, mu, ell, alpha)
    return PolyakCase.ONE if alpha > polyak_case_threshold(gamma, mu, ell) else PolyakCase.TWO


def polyak_case1_bound(gamma: float, mu: float, ell: float, alpha: float) -> float:
    """``1 - mu L (2 - gamma) alpha^2 / ((L + mu) alpha - gamma)``."""
    return 1.0 - mu * ell * (2.0 - gamma) * alpha ** 2 / ((ell + mu) * alpha - gamma)


def _polyak_condition(mu, ell, alpha, zeta1, zeta2, zeta3):
    beta = (zeta1 + zeta2) / (2 * (ell - mu))
    terms = (beta, -zeta3 * alpha, -alpha * (2 * mu * beta + zeta1) / 2)
    return beta, _relative(*terms)


def polyak_case1_certificate(gamma: float, mu: float, ell: float, alpha: float) -> PolyakProofCertificate:
    """Case One multipliers: the ``f_k - f_*`` coefficient is cancelled (sigma = 0)."""
    if polyak_case_split(gamma, mu, ell, alpha) is not PolyakCase.ONE:
        raise WrongCase(f"alpha = {alpha} falls in Case Two")
    L = ell
    den = (2 - gamma) * alpha
    z1 = 2 * ((L - mu) * alpha - gamma * (1 - mu * alpha)) / den
    z2 = 2 * ((1 - gamma) * (L - mu) * alpha + gamma * (1 - mu * alpha)) / den
    z3 = (2 - (L + mu) * alpha) / den
    beta, cond = _polyak_condition(mu, L, alpha, z1, z2, z3)
    sigma = z1 - z2 + 2 * gamma * z3
    worst = 2 * gamma / (L + mu)
    return PolyakProofCertificate(
        PolyakCase.ONE, gamma, mu, L, alpha, z1, z2, z3, beta, sigma,
        polyak_case1_bound(gamma, mu, L, alpha), worst,
        polyak_case1_bound(gamma, mu, L, worst), cond)


def polyak_case2_h(gamma: float, mu: float, ell: float, zeta1: float, alpha):
    """``alpha + zeta1 (gamma + ((1-gamma)(L-mu) - gamma mu) alpha) / (2 (L-mu) alpha)``.

    The certified contraction at step ``alpha`` is ``1 - mu h(alpha)``.
    """
    alpha = np.asarray(alpha, dtype=float)
    L = ell
    return alpha + zeta1 * (gamma + ((1 - gamma) * (L - mu) - gamma * mu) * alpha) / (2 * (L - mu) * alpha)


def polyak_case2_certificate(gamma: float, mu: float, ell: float,
                             alpha: float | None = None) -> PolyakProofCertificate:
    """Case Two multipliers with ``zeta2 = 0``.

    ``zeta1 = 8 gamma (L - mu) / (L + mu)^2`` is the value for which the
    minimizer of ``h`` is ``2 gamma / (L + mu)``.  Without ``alpha`` the
    certificate is evaluated at that minimizer.
    """
    _check_class(mu, ell)
    _check_gamma(gamma)
    L = ell
    z1 = 8 * gamma * (L - mu) / (L + mu) ** 2
    z2 = 0.0
    worst = math.sqrt(gamma * z1 / (2 * (L - mu)))
    if alpha is None:
        alpha = worst
    elif polyak_case_split(gamma, mu, L, alpha) is not PolyakCase.TWO:
        raise WrongCase(f"alpha = {alpha} falls in Case One")
    z3 = (1 - mu * alpha) * (z1 + z2) / (2 * (L - mu) * alpha) - z1 / 2
    beta, cond = _polyak_condition(mu, L, alpha, z1, z2, z3)
    sigma = z1 - z2 + 2 * gamma * z3
    return PolyakProofCertificate(
        PolyakCase.TWO, gamma, mu, L, alpha, z1, z2, z3, beta, sigma,
        1 - mu * float(polyak_case2_h(gamma, mu, L, z1, alpha)), worst,
        1 - mu * float(polyak_case2_h(gamma, mu, L, z1, worst)), cond)


def polyak_case2_minimizer(gamma: float, mu: float, ell: float, zeta1: float | None = None,
                           grid_size: int = 10_001) -> float:
    """Minimize ``h`` over ``[gamma/L, gamma/mu]`` numerically.

    A grid locates the minimum; the root of ``h'`` inside the neighbouring
    grid cells then refines it.
    """
    _check_class(mu, ell)
    _check_gamma(gamma)
    if zeta1 is None:
        zeta1 = 8 * gamma * (ell - mu) / (ell + mu) ** 2
    lo, hi = gamma / ell, gamma / mu
    grid = np.linspace(lo, hi, grid_size)
    i = int(np.argmin(polyak_case2_h(gamma, mu, ell, zeta1, grid)))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid_size - 1)]

    def dh(t):
        return 1.0 - gamma * zeta1 / (2 * (ell - mu) * t * t)

    if dh(a) >= 0:
        return float(a)
    if dh(b) <= 0:
        return float(b)
    return float(brentq(dh, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))
