"""Stepsize rules: the psi-weighted family, Polyak, and numeric exact line search.

Rule strings (used by the CLI)::

    sd                      psi = identity, gamma = 1
    sd:gamma=0.5
    polyak                  2 gamma (f_k - f_*) / ||g_k||^2
    polyak:gamma=0.8
    family:psi=power(-1):gamma=1
    family:psi=laurent(-1=1,1=2)
    els:tol=1e-12           bisection on the directional derivative
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    InvalidRule,
    NegativeGap,
    RuleInapplicable,
    ZeroGradient,
)
from .linesearch import exact_step
from .oracles import SmoothStronglyConvexOracle
from .spectral import QuadraticProblem, SpectralWeight, as_vector, weight_on

__all__ = [
    "PsiFamily",
    "PolyakGeneral",
    "ExactLineSearchNumeric",
    "StepsizeRule",
    "parse_rule",
    "parse_weight",
    "family_step",
    "gsd_step",
    "polyak_step_quadratic",
    "polyak_step_general",
    "exact_line_search_numeric",
    "rule_weight",
    "compute_step",
]

NEGATIVE_GAP_TOL = 1e-12


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma <= 1.0:
        raise InvalidRule(f"gamma must lie in (0, 1], got {gamma}")
    return gamma


@dataclass(frozen=True)
class PsiFamily:
    psi: SpectralWeight = field(default_factory=SpectralWeight.identity)
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))

    def __str__(self):
        if self.psi.describe() == "identity":
            return "sd" if self.gamma == 1.0 else f"sd:gamma={self.gamma!r}"
        return f"family:psi={self.psi.describe()}:gamma={self.gamma!r}"


@dataclass(frozen=True)
class PolyakGeneral:
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))

    def __str__(self):
        return "polyak" if self.gamma == 1.0 else f"polyak:gamma={self.gamma!r}"


@dataclass(frozen=True)
class ExactLineSearchNumeric:
    gamma: float = 1.0
    tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))
        if not self.tol > 0:
            raise InvalidRule(f"line-search tolerance must be positive, got {self.tol}")

    def __str__(self):
        out = f"els:tol={self.tol!r}"
        return out if self.gamma == 1.0 else f"{out}:gamma={self.gamma!r}"


StepsizeRule = Union[PsiFamily, PolyakGeneral, ExactLineSearchNumeric]

_WEIGHT_RE = re.compile(r"^\s*(identity|power|laurent)\s*(?:\((.*)\))?\s*$")


def parse_weight(text: str) -> SpectralWeight:
    """``identity``, ``power(-1)`` or ``laurent(-1=1,1=0.5)``."""
    m = _WEIGHT_RE.match(text)
    if not m:
        raise InvalidRule(f"cannot parse weight {text!r}")
    kind, arg = m.groups()
    try:
        if kind == "identity":
            if arg not in (None, ""):
                raise InvalidRule("identity takes no argument")
            return SpectralWeight.identity()
        if kind == "power":
            return SpectralWeight.power(int(arg))
        coeffs = {}
        for item in arg.split(","):
            deg, val = item.split("=")
            coeffs[int(deg)] = float(val)
        return SpectralWeight.laurent(coeffs)
    except (TypeError, ValueError, AttributeError) as exc:
        raise InvalidRule(f"cannot parse weight {text!r}: {exc}") from None


def parse_rule(text: str) -> StepsizeRule:
    head, *rest = text.strip().split(":")
    opts = {}
    for item in rest:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise InvalidRule(f"malformed option {item!r} in rule {text!r}")
        opts[key.strip()] = val.strip()

    def take(name, conv, default):
        raw = opts.pop(name, None)
        if raw is None:
            return default
        try:
            return conv(raw)
        except ValueError:
            raise InvalidRule(f"bad value for {name} in rule {text!r}") from None

    head = head.strip().lower()
    if head == "sd":
        rule = PsiFamily(SpectralWeight.identity(), take("gamma", float, 1.0))
    elif head == "polyak":
        rule = PolyakGeneral(take("gamma", float, 1.0))
    elif head == "family":
        rule = PsiFamily(take("psi", parse_weight, SpectralWeight.identity()),
                         take("gamma", float, 1.0))
    elif head == "els":
        rule = ExactLineSearchNumeric(take("gamma", float, 1.0), take("tol", float, 1e-12))
    else:
        raise InvalidRule(f"unknown rule {head!r}")
    if opts:
        raise InvalidRule(f"unknown options {sorted(opts)} for rule {head!r}")
    return rule


def rule_weight(rule: StepsizeRule) -> SpectralWeight:
    """The member of the weighted family a rule coincides with on quadratics."""
    if isinstance(rule, PsiFamily):
        return rule.psi
    if isinstance(rule, PolyakGeneral):
        return SpectralWeight.power(-1)
    return SpectralWeight.identity()


def _nonzero(g: np.ndarray) -> None:
    if not np.any(g):
        raise ZeroGradient("stepsize is undefined at a zero gradient")


def family_step(P: QuadraticProblem, psi: SpectralWeight, gamma: float, g) -> float:
    """``gamma * g'psi(A)g / g'psi(A)Ag``."""
    gamma = _check_gamma(gamma)
    g = as_vector(g, P.n, "g")
    _nonzero(g)
    g = g / np.max(np.abs(g))  # scale-free; keeps g*g clear of under/overflow
    wg2 = weight_on(psi, P.spectrum) * g * g
    return float(gamma * wg2.sum() / np.dot(wg2, P.eigenvalues))


def gsd_step(P: QuadraticProblem, gamma: float, g) -> float:
    return family_step(P, SpectralWeight.identity(), gamma, g)


def polyak_step_quadratic(P: QuadraticProblem, gamma: float, g) -> float:
    """``gamma * g'A^{-1}g / g'g``."""
    gamma = _check_gamma(gamma)
    g = as_vector(g, P.n, "g")
    _nonzero(g)
    g = g / np.max(np.abs(g))
    g2 = g * g
    return float(gamma * np.dot(g2, 1.0 / P.eigenvalues) / g2.sum())


def polyak_step_general(f_k: float, f_star: float, g, gamma: float = 1.0) -> float:
    gamma = _check_gamma(gamma)
    g = np.asarray(g, dtype=float)
    _nonzero(g)
    gap = f_k - f_star
    if gap < -NEGATIVE_GAP_TOL:
        raise NegativeGap(f"f_k - f_* = {gap:.3e} < 0; the optimal value is wrong")
    s = float(np.max(np.abs(g)))
    gs = g / s
    return float(2.0 * gamma * (max(gap, 0.0) / s) / np.dot(gs, gs) / s)


def exact_line_search_numeric(oracle: SmoothStronglyConvexOracle, x, g, gamma: float = 1.0,
                              tol: float = 1e-12) -> float:
    gamma = _check_gamma(gamma)
    x = as_vector(x, oracle.dim)
    g = as_vector(g, oracle.dim, "g")
    _nonzero(g)
    return gamma * exact_step(oracle.gradient, x, g, oracle.mu, oracle.ell, tol)


def compute_step(rule: StepsizeRule, oracle: SmoothStronglyConvexOracle, x: np.ndarray,
                 g: np.ndarray, f_gap: float | None) -> float:
    """Stepsize of ``rule`` at ``x`` (gradient ``g``, gap ``f_gap``)."""
    if isinstance(rule, PsiFamily):
        if oracle.problem is None:
            raise RuleInapplicable("the psi-family rule needs a quadratic problem")
        return family_step(oracle.problem, rule.psi, rule.gamma, g)
    if isinstance(rule, PolyakGeneral):
        if f_gap is None:
            raise RuleInapplicable("the Polyak rule needs the optimal value f_*")
        return polyak_step_general(f_gap, 0.0, g, rule.gamma)
    if isinstance(rule, ExactLineSearchNumeric):
        return exact_line_search_numeric(oracle, x, g, rule.gamma, rule.tol)
    raise TypeError(f"not a stepsize rule: {rule!r}")
