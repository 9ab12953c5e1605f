"""First-order oracles for the class F_{mu,L} and the interpolation checker."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from .errors import DegenerateClass, DegenerateRows, DimensionMismatch, InvalidClass
from .spectral import QuadraticProblem, as_vector, quad_gap, quad_gradient, quad_value

__all__ = [
    "SmoothStronglyConvexOracle",
    "InterpolationResidual",
    "quadratic_as_oracle",
    "dense_quadratic_oracle",
    "lse_ridge_oracle",
    "interpolation_residual",
    "power_iteration_sigma_max",
]


@dataclass(frozen=True, eq=False)
class SmoothStronglyConvexOracle:
    """Value/gradient oracle of an L-smooth, mu-strongly convex function.

    ``gap``, when given, evaluates ``f(x) - f_*`` more accurately than
    ``value(x) - optimal_value`` (which cancels badly near the minimizer).
    ``problem`` links quadratic oracles back to their spectral form.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    mu: float
    ell: float
    dim: int
    optimal_value: float | None = None
    optimal_point: np.ndarray | None = None
    gap: Callable[[np.ndarray], float] | None = None
    problem: QuadraticProblem | None = None
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.mu > 0 and np.isfinite(self.ell)):
            raise InvalidClass(f"need 0 < mu and finite L, got mu={self.mu}, L={self.ell}")
        if self.mu > self.ell:
            raise InvalidClass(f"mu={self.mu} exceeds L={self.ell}")

    def f_gap(self, x) -> float | None:
        if self.gap is not None:
            return self.gap(x)
        if self.optimal_value is None:
            return None
        return self.value(x) - self.optimal_value


@dataclass(frozen=True)
class InterpolationResidual:
    value: float
    pair: tuple[np.ndarray, np.ndarray]


def quadratic_as_oracle(P: QuadraticProblem) -> SmoothStronglyConvexOracle:
    return SmoothStronglyConvexOracle(
        value=lambda x: quad_value(P, x),
        gradient=lambda x: quad_gradient(P, x),
        mu=P.mu,
        ell=P.ell,
        dim=P.n,
        optimal_value=P.f_star,
        optimal_point=P.x_star.copy(),
        gap=lambda x: quad_gap(P, x),
        problem=P,
        name="quadratic",
        params={"eigenvalues": list(P.spectrum.eigenvalues), "b": list(P.b)},
    )


def dense_quadratic_oracle(P: QuadraticProblem, Q: np.ndarray) -> SmoothStronglyConvexOracle:
    """The quadratic ``Q diag(lambda) Q^T`` rotated by an orthogonal ``Q``.

    The result behaves as a black box (no ``problem`` link); the spectral
    problem ``P`` remains the ground truth for ``x_*`` and ``f_*``.
    """
    Q = np.asarray(Q, dtype=float)
    n = P.n
    if Q.shape != (n, n):
        raise DimensionMismatch(f"Q has shape {Q.shape}, expected ({n}, {n})")
    if not np.allclose(Q.T @ Q, np.eye(n), atol=1e-12):
        raise ValueError("Q is not orthogonal")
    A = (Q * P.eigenvalues) @ Q.T
    A = 0.5 * (A + A.T)
    b = Q @ P.b_vector
    x_star = Q @ P.x_star

    def value(x):
        x = as_vector(x, n)
        return float(0.5 * x @ A @ x - b @ x)

    def gradient(x):
        return A @ (as_vector(x, n) - x_star)

    def gap(x):
        e = as_vector(x, n) - x_star
        return float(0.5 * e @ A @ e)

    return SmoothStronglyConvexOracle(value, gradient, P.mu, P.ell, n, P.f_star, x_star,
                                      gap=gap, name="dense_quadratic")


def power_iteration_sigma_max(M: np.ndarray, rtol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Largest singular value of ``M`` from power iteration on ``M^T M``.

    Stops on the eigen-residual ``||G v - theta v|| <= rtol * theta``; for
    symmetric ``G`` this bounds the error of ``theta = sigma^2`` by
    ``rtol * theta`` (successive differences of ``theta`` would not).
    """
    G = M.T @ M
    n = G.shape[0]
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    theta = 0.0
    for _ in range(max_iter):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector in the null space; restart from a basis vector
            v = np.zeros(n)
            v[int(np.argmax(np.diag(G)))] = 1.0
            continue
        theta = float(v @ w)
        if np.linalg.norm(w - theta * v) <= rtol * theta:
            break
        v = w / nw
    return float(np.sqrt(theta))


def _expm1_minus_id(t: np.ndarray) -> np.ndarray:
    """``expm1(t) - t`` accurate for small ``|t|``."""
    t = np.asarray(t, dtype=float)
    out = np.expm1(t) - t
    small = np.abs(t) < 0.5
    if small.any():
        ts = t[small]
        term = ts * ts / 2.0
        acc = term.copy()
        for k in range(3, 24):
            term = term * ts / k
            acc += term
        out[small] = acc
    return out


class _LogSumExpRidge:
    """``tau * logsumexp(R x / tau) + mu0/2 ||x - anchor||^2``.

    After :meth:`attach_minimizer` the gradient and the gap are evaluated
    relative to the minimizer estimate, which keeps full relative accuracy as
    iterates approach it.
    """

    # beyond this spread of logits the centered formulas are not needed
    CENTERED_LIMIT = 0.5

    def __init__(self, rows, tau, mu0, anchor):
        self.rows = rows
        self.tau = tau
        self.mu0 = mu0
        self.anchor = anchor
        self.x_star = None

    def value(self, x):
        x = as_vector(x, self.anchor.size)
        d = x - self.anchor
        return float(self.tau * logsumexp(self.rows @ x / self.tau) + 0.5 * self.mu0 * (d @ d))

    def plain_gradient(self, x):
        x = as_vector(x, self.anchor.size)
        p = softmax(self.rows @ x / self.tau)
        return self.rows.T @ p + self.mu0 * (x - self.anchor)

    def hessian(self, x):
        p = softmax(self.rows @ as_vector(x, self.anchor.size) / self.tau)
        rp = self.rows.T @ p
        H = (self.rows.T * p) @ self.rows - np.outer(rp, rp)
        return H / self.tau + self.mu0 * np.eye(self.anchor.size)

    def attach_minimizer(self, x_star):
        self.x_star = x_star
        self.p_star = softmax(self.rows @ x_star / self.tau)
        self.r_star = self.plain_gradient(x_star)
        self.f_star = self.value(x_star)

    def _centered(self, x):
        e = as_vector(x, self.anchor.size) - self.x_star
        d = self.rows @ e / self.tau
        dc = d - self.p_star @ d
        if np.max(np.abs(dc), initial=0.0) > self.CENTERED_LIMIT:
            return e, None, None
        s = float(self.p_star @ _expm1_minus_id(dc))
        return e, dc, s

    def gradient(self, x):
        if self.x_star is None:
            return self.plain_gradient(x)
        e, dc, s = self._centered(x)
        if dc is None:
            return self.plain_gradient(x)
        dp = self.p_star * np.expm1(dc - np.log1p(s))
        return self.r_star + self.rows.T @ dp + self.mu0 * e

    def gap(self, x):
        e, dc, s = self._centered(x)
        if dc is None:
            return self.value(x) - self.f_star
        return float(self.tau * np.log1p(s) + self.r_star @ e + 0.5 * self.mu0 * (e @ e))


def _presolve(fn: _LogSumExpRidge) -> np.ndarray:
    """Trust-region Newton from the anchor, then plain Newton polishing."""
    res = minimize(fn.value, fn.anchor.copy(), jac=fn.plain_gradient, hess=fn.hessian,
                   method="trust-exact", options={"gtol": 1e-13})
    x = res.x
    g = fn.plain_gradient(x)
    for _ in range(5):
        if not np.any(g):
            break
        x_new = x - np.linalg.solve(fn.hessian(x), g)
        g_new = fn.plain_gradient(x_new)
        if np.linalg.norm(g_new) >= np.linalg.norm(g):
            break
        x, g = x_new, g_new
    return x


def lse_ridge_oracle(rows, tau: float, mu0: float, anchor) -> SmoothStronglyConvexOracle:
    """Softmax-ridge member of F_{mu,L}.

    ``mu = mu0`` and ``L = mu0 + sigma_max(rows)^2 / tau``; the curvature of
    the log-sum-exp part never exceeds ``sigma_max^2 / tau`` so the pair is a
    valid (conservative) class certificate.  ``f_*`` and ``x_*`` come from a
    pre-solve at construction.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    anchor = np.asarray(anchor, dtype=float)
    if not (tau > 0 and mu0 > 0):
        raise InvalidClass("tau and mu0 must be positive")
    if rows.ndim != 2 or anchor.shape != (rows.shape[1],):
        raise DimensionMismatch(f"rows {rows.shape} incompatible with anchor {anchor.shape}")
    if not np.any(rows):
        raise DegenerateRows("all rows are zero")
    sigma = power_iteration_sigma_max(rows)
    mu, ell = float(mu0), float(mu0 + sigma * sigma / tau)

    fn = _LogSumExpRidge(rows, float(tau), float(mu0), anchor)
    x_star = _presolve(fn)
    fn.attach_minimizer(x_star)
    return SmoothStronglyConvexOracle(
        value=fn.value,
        gradient=fn.gradient,
        mu=mu,
        ell=ell,
        dim=anchor.size,
        optimal_value=fn.f_star,
        optimal_point=x_star.copy(),
        gap=fn.gap,
        name="lse_ridge",
        params={"rows": rows.tolist(), "tau": float(tau), "mu0": float(mu0),
                "anchor": anchor.tolist()},
    )


def interpolation_residual(oracle: SmoothStronglyConvexOracle, x, y) -> InterpolationResidual:
    """Left-hand side of the F_{mu,L} interpolation inequality (must be <= 0)."""
    x = as_vector(x, oracle.dim)
    y = as_vector(y, oracle.dim, "y")
    mu, ell = oracle.mu, oracle.ell
    if mu >= ell:
        raise DegenerateClass("interpolation inequality needs mu < L")
    gx, gy = oracle.gradient(x), oracle.gradient(y)
    if oracle.gap is not None:
        df = oracle.gap(x) - oracle.gap(y)
    else:
        df = oracle.value(x) - oracle.value(y)
    dx, dg = x - y, gx - gy
    inner = mu * (dx @ dx) - (2.0 * mu / ell) * (dg @ dx) + (dg @ dg) / ell
    val = df + gx @ (y - x) + inner / (2.0 * (1.0 - mu / ell))
    return InterpolationResidual(float(val), (x, y))
