"""Asymptotic zigzag of the weighted family with gamma = 1.

For a start whose gradient has nonzero components along both extreme
eigenvectors, the normalized gradient alternates between two directions in
span{xi_1, xi_n}.  Even iterates approach fractions (1, c^2)/(1 + c^2) and
odd iterates the psi-reweighted counterpart, for a constant ``c`` fixed by
the start.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolated, InsufficientIterates, ZeroConstant, ZeroGradient
from .solver import Trace
from .spectral import QuadraticProblem, RelaxedSpectrum, SpectralWeight, as_vector, eval_weight, quad_gradient

__all__ = [
    "ComponentProfile",
    "ZigzagReport",
    "gradient_components",
    "component_profile",
    "predicted_limits",
    "zigzag_analysis",
]

# number of trailing even (odd) iterates averaged for the estimate of c
C_WINDOW = 10
FRACTION_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ComponentProfile:
    k: int
    fractions: np.ndarray


@dataclass(frozen=True)
class ZigzagReport:
    c_even: float
    c_odd: float
    middle_mass_even: float
    middle_mass_odd: float
    even_limits: np.ndarray
    odd_limits: np.ndarray
    measured_even: np.ndarray
    measured_odd: np.ndarray
    predicted_vs_measured_max_err: float

    @property
    def c_relative_gap(self) -> float:
        return abs(self.c_even - self.c_odd) / abs(self.c_even)

    def to_dict(self) -> dict:
        return {
            "c_even": self.c_even,
            "c_odd": self.c_odd,
            "middle_mass_even": self.middle_mass_even,
            "middle_mass_odd": self.middle_mass_odd,
            "even_limits": self.even_limits.tolist(),
            "odd_limits": self.odd_limits.tolist(),
            "predicted_vs_measured_max_err": self.predicted_vs_measured_max_err,
        }


def gradient_components(P: QuadraticProblem, g) -> np.ndarray:
    """Components of ``g`` along the eigenvectors (the coordinates, here)."""
    return as_vector(g, P.n, "g").copy()


def component_profile(P: QuadraticProblem, g, k: int = 0) -> ComponentProfile:
    nu = gradient_components(P, g)
    scale = np.max(np.abs(nu))
    if scale == 0:
        raise ZeroGradient("component profile of a zero gradient is undefined")
    nu = nu / scale  # avoids underflow in the squares
    sq = nu * nu
    return ComponentProfile(k, sq / sq.sum())


def predicted_limits(c: float, psi: SpectralWeight, mu: float, ell: float,
                     n: int) -> tuple[np.ndarray, np.ndarray]:
    """Limiting squared-component fractions on even and odd iterates."""
    if c == 0:
        raise ZeroConstant("the zigzag constant must be nonzero")
    if n < 2:
        raise ValueError("n must be at least 2")
    c2 = c * c
    pm2, pl2 = eval_weight(psi, mu) ** 2, eval_weight(psi, ell) ** 2
    even = np.zeros(n)
    odd = np.zeros(n)
    even[0], even[-1] = 1.0 / (1.0 + c2), c2 / (1.0 + c2)
    odd[0], odd[-1] = c2 * pl2 / (pm2 + c2 * pl2), pm2 / (pm2 + c2 * pl2)
    return even, odd


def zigzag_analysis(trace: Trace, P: QuadraticProblem, psi: SpectralWeight,
                    burn_in: int | None = None) -> ZigzagReport:
    """Estimate ``c`` from a gamma = 1 family trace and compare with the limits.

    ``burn_in`` defaults to half the trace.  ``c`` is averaged over the last
    ten even (odd) iterates; measured fractions are those of the last even
    and the last odd iterate.
    """
    if isinstance(P.spectrum, RelaxedSpectrum):
        raise AssumptionViolated("zigzag analysis needs distinct eigenvalues")
    if getattr(trace.rule, "gamma", 1.0) != 1.0:
        raise AssumptionViolated("zigzag limits hold for gamma = 1 only")
    n_rec = len(trace.records)
    if burn_in is None:
        burn_in = n_rec // 2
    if n_rec <= burn_in + 4:
        raise InsufficientIterates(f"{n_rec} records, need more than burn_in + 4 = {burn_in + 4}")

    g0 = quad_gradient(P, trace.records[0].x)
    if g0[0] == 0 or g0[-1] == 0:
        raise AssumptionViolated("the starting gradient must have nonzero extreme components")

    even, odd = [], []
    for rec in trace.records[burn_in:]:
        g = quad_gradient(P, rec.x)
        if not np.any(g):
            continue
        (even if rec.k % 2 == 0 else odd).append((rec.k, g / np.max(np.abs(g))))
    if not even or not odd:
        raise InsufficientIterates("need both even and odd iterates after burn-in")

    r_even = [u[-1] / u[0] for _, u in even[-C_WINDOW:]]
    r_odd = [u[0] / u[-1] for _, u in odd[-C_WINDOW:]]
    c_even = float(np.mean(r_even))
    c_odd = float(-(eval_weight(psi, P.mu) / eval_weight(psi, P.ell)) * np.mean(r_odd))

    prof_even = component_profile(P, even[-1][1], even[-1][0]).fractions
    prof_odd = component_profile(P, odd[-1][1], odd[-1][0]).fractions
    lim_even, lim_odd = predicted_limits(c_even, psi, P.mu, P.ell, P.n)
    err = float(max(np.max(np.abs(prof_even - lim_even)), np.max(np.abs(prof_odd - lim_odd))))
    mid_even = float(np.max(prof_even[1:-1], initial=0.0))
    mid_odd = float(np.max(prof_odd[1:-1], initial=0.0))
    return ZigzagReport(c_even, c_odd, mid_even, mid_odd, lim_even, lim_odd,
                        prof_even, prof_odd, err)
