"""Strongly convex quadratics in spectral form and spectral weight functions.

The Hessian is stored as its (diagonal) spectrum, so eigenvector ``i`` is the
``i``-th standard basis vector and every quadratic form reduces to a weighted
sum over coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidSpectrum,
    NonPositiveWeight,
    ZeroGradient,
)

__all__ = [
    "Spectrum",
    "RelaxedSpectrum",
    "QuadraticProblem",
    "SpectralWeight",
    "eval_weight",
    "weight_on",
    "quad_value",
    "quad_gradient",
    "quad_gap",
    "minimizer",
    "weighted_norm_sq",
    "kantorovich_ratio",
    "kantorovich_bound",
    "as_vector",
]

# positivity of psi is sampled at this many interior points plus both endpoints
WEIGHT_SAMPLES = 1024


def as_vector(x, n: int, name: str = "x") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise DimensionMismatch(f"{name} has shape {v.shape}, expected ({n},)")
    return v


@dataclass(frozen=True)
class Spectrum:
    """Strictly increasing positive eigenvalues, ``n >= 2``."""

    eigenvalues: tuple[float, ...]

    def __post_init__(self):
        lam = tuple(float(v) for v in self.eigenvalues)
        object.__setattr__(self, "eigenvalues", lam)
        if len(lam) < 2:
            raise InvalidSpectrum("a spectrum needs at least two eigenvalues")
        if not all(math.isfinite(v) and v > 0 for v in lam):
            raise InvalidSpectrum("eigenvalues must be finite and strictly positive")
        self._check_order(lam)

    def _check_order(self, lam):
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise InvalidSpectrum("eigenvalues must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def mu(self) -> float:
        return self.eigenvalues[0]

    @property
    def ell(self) -> float:
        return self.eigenvalues[-1]

    @property
    def condition_number(self) -> float:
        return self.ell / self.mu

    @cached_property
    def values(self) -> np.ndarray:
        arr = np.array(self.eigenvalues)
        arr.flags.writeable = False
        return arr


@dataclass(frozen=True)
class RelaxedSpectrum(Spectrum):
    """Like :class:`Spectrum` but allows repeated eigenvalues.

    Meant for robustness experiments only; certificate and asymptotic
    analyses refuse problems built on it.
    """

    def _check_order(self, lam):
        if any(b < a for a, b in zip(lam, lam[1:])):
            raise InvalidSpectrum("eigenvalues must be non-decreasing")


@dataclass(frozen=True)
class QuadraticProblem:
    """``f(x) = 1/2 x^T A x - b^T x`` with ``A = diag(spectrum)``."""

    spectrum: Spectrum
    b: tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        object.__setattr__(self, "b", b)
        if len(b) != self.spectrum.n:
            raise DimensionMismatch(f"b has length {len(b)}, spectrum has {self.spectrum.n}")
        if not all(math.isfinite(v) for v in b):
            raise InvalidSpectrum("b must be finite")

    @classmethod
    def from_eigenvalues(cls, eigenvalues: Sequence[float], b: Sequence[float] | None = None,
                         relaxed: bool = False) -> "QuadraticProblem":
        spec = (RelaxedSpectrum if relaxed else Spectrum)(tuple(eigenvalues))
        return cls(spec, tuple(b) if b is not None else (0.0,) * spec.n)

    @property
    def n(self) -> int:
        return self.spectrum.n

    @property
    def mu(self) -> float:
        return self.spectrum.mu

    @property
    def ell(self) -> float:
        return self.spectrum.ell

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.values

    @cached_property
    def b_vector(self) -> np.ndarray:
        arr = np.array(self.b)
        arr.flags.writeable = False
        return arr

    @cached_property
    def x_star(self) -> np.ndarray:
        arr = self.b_vector / self.eigenvalues
        arr.flags.writeable = False
        return arr

    @cached_property
    def f_star(self) -> float:
        return quad_value(self, self.x_star)


@dataclass(frozen=True)
class SpectralWeight:
    """A finite Laurent polynomial ``psi(z) = sum_k c_k z^k``.

    ``variant`` is informational ("identity", "power" or "laurent"); the
    coefficients alone define the function.
    """

    coeffs: tuple[tuple[int, float], ...]
    variant: str = "laurent"

    def __post_init__(self):
        merged: dict[int, float] = {}
        for deg, c in self.coeffs:
            if int(deg) != deg:
                raise ValueError(f"Laurent degree must be an integer, got {deg!r}")
            merged[int(deg)] = merged.get(int(deg), 0.0) + float(c)
        cleaned = tuple(sorted((d, c) for d, c in merged.items() if c != 0.0))
        if not cleaned:
            raise NonPositiveWeight("the zero polynomial is not a valid weight")
        object.__setattr__(self, "coeffs", cleaned)

    @classmethod
    def identity(cls) -> "SpectralWeight":
        return cls(((0, 1.0),), "identity")

    @classmethod
    def power(cls, p: int) -> "SpectralWeight":
        if int(p) != p:
            raise ValueError(f"power must be an integer, got {p!r}")
        if p == 0:
            return cls.identity()
        return cls(((int(p), 1.0),), "power")

    @classmethod
    def laurent(cls, coeffs: Mapping[int, float]) -> "SpectralWeight":
        return cls(tuple((int(k), float(v)) for k, v in coeffs.items()), "laurent")

    @property
    def p(self) -> int | None:
        """Exponent of a pure power weight, ``None`` otherwise."""
        if len(self.coeffs) == 1 and self.coeffs[0][1] == 1.0:
            return self.coeffs[0][0]
        return None

    def scaled(self, c: float) -> "SpectralWeight":
        if not c > 0:
            raise ValueError("scale must be positive")
        return SpectralWeight(tuple((d, c * v) for d, v in self.coeffs), "laurent")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        for deg, c in self.coeffs:
            out = out + c * z ** deg
        return out if out.ndim else float(out)

    def check_positive(self, mu: float, ell: float) -> None:
        """Raise :class:`NonPositiveWeight` unless psi > 0 on ``[mu, ell]``."""
        z = np.linspace(mu, ell, WEIGHT_SAMPLES + 2)
        vals = self(z)
        bad = ~(np.isfinite(vals) & (vals > 0))
        if bad.any():
            zbad = z[np.argmax(bad)]
            raise NonPositiveWeight(
                f"weight {self.describe()} is not positive on [{mu}, {ell}] (e.g. at z={zbad:g})"
            )

    def describe(self) -> str:
        if self.variant == "identity" and self.coeffs == ((0, 1.0),):
            return "identity"
        if self.p is not None:
            return f"power({self.p})"
        body = ",".join(f"{d}={c!r}" for d, c in self.coeffs)
        return f"laurent({body})"


def eval_weight(psi: SpectralWeight, z: float) -> float:
    val = psi(float(z))
    if not (math.isfinite(val) and val > 0):
        raise NonPositiveWeight(f"psi({z}) = {val} is not positive")
    return val


@lru_cache(maxsize=512)
def weight_on(psi: SpectralWeight, spectrum: Spectrum) -> np.ndarray:
    """psi evaluated on the eigenvalues, after checking positivity on [mu, L].

    Cached per (psi, spectrum) pair, so the positivity check runs once when a
    weight is first bound to a problem.
    """
    psi.check_positive(spectrum.mu, spectrum.ell)
    w = psi(spectrum.values)
    w.flags.writeable = False
    return w


def quad_value(P: QuadraticProblem, x) -> float:
    x = as_vector(x, P.n)
    return float(0.5 * np.dot(P.eigenvalues * x, x) - np.dot(P.b_vector, x))


def quad_gradient(P: QuadraticProblem, x) -> np.ndarray:
    # written around x_* so the gradient vanishes exactly at the minimizer
    x = as_vector(x, P.n)
    return P.eigenvalues * (x - P.x_star)


def quad_gap(P: QuadraticProblem, x) -> float:
    """``f(x) - f_*`` evaluated without cancellation."""
    e = as_vector(x, P.n) - P.x_star
    return float(0.5 * np.dot(P.eigenvalues * e, e))


def minimizer(P: QuadraticProblem) -> tuple[np.ndarray, float]:
    return P.x_star.copy(), P.f_star


def weighted_norm_sq(P: QuadraticProblem, psi: SpectralWeight, v) -> float:
    """``v^T psi(A) A v``."""
    v = as_vector(v, P.n, "v")
    w = weight_on(psi, P.spectrum)
    return float(np.dot(w * P.eigenvalues * v, v))


def kantorovich_bound(mu: float, ell: float) -> float:
    return 4.0 * mu * ell / (ell + mu) ** 2


def kantorovich_ratio(P: QuadraticProblem, psi: SpectralWeight, g) -> float:
    """``(g'Wg)^2 / (g'WAg * g'WA^{-1}g)`` with ``W = psi(A)``."""
    g = as_vector(g, P.n, "g")
    if not np.any(g):
        raise ZeroGradient("Kantorovich ratio is undefined at g = 0")
    lam = P.eigenvalues
    g = g / np.max(np.abs(g))  # the ratio is scale-free; avoid under/overflow
    wg2 = weight_on(psi, P.spectrum) * g * g
    wg2 /= wg2.max()
    m0 = wg2.sum()
    return float(m0 * m0 / (np.dot(wg2, lam) * np.dot(wg2, 1.0 / lam)))
