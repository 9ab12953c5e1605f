"""The gradient iteration ``x_{k+1} = x_k - alpha_k g_k`` with a full trace."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import MetricUnavailable, NonFiniteIterate, RuleInapplicable
from .oracles import SmoothStronglyConvexOracle
from .spectral import as_vector, weighted_norm_sq
from .stepsizes import PolyakGeneral, PsiFamily, StepsizeRule, compute_step, rule_weight

__all__ = [
    "IterateRecord",
    "StoppingRule",
    "Termination",
    "Trace",
    "Metric",
    "run",
    "contraction_series",
]

RATIO_UNDERFLOW = 1e-300


@dataclass(frozen=True)
class IterateRecord:
    k: int
    x: np.ndarray
    f_gap: float | None
    grad_norm: float
    dist_sq: float | None = None
    weighted_dist_sq: float | None = None
    alpha: float | None = None


@dataclass(frozen=True)
class StoppingRule:
    """Stop once ``||g_k|| <= grad_rel_tol * ||g_0||`` or after ``max_iters`` steps."""

    grad_rel_tol: float = 1e-8
    max_iters: int = 100_000

    def __post_init__(self):
        if self.grad_rel_tol < 0:
            raise ValueError("grad_rel_tol must be nonnegative")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")


class Termination(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    AT_OPTIMUM = "AtOptimum"


class Metric(enum.Enum):
    FGAP = "f_gap"
    DIST_SQ = "dist_sq"
    WEIGHTED_DIST_SQ = "weighted_dist_sq"


@dataclass(frozen=True)
class Trace:
    records: tuple[IterateRecord, ...]
    termination: Termination
    rule: StepsizeRule

    def __len__(self):
        return len(self.records)

    @property
    def iterations(self) -> int:
        """Number of steps taken."""
        return len(self.records) - 1

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]


def run(oracle: SmoothStronglyConvexOracle, rule: StepsizeRule, x0,
        stop: StoppingRule = StoppingRule()) -> Trace:
    """Iterate from ``x0`` until the stopping rule fires.

    Terminates with ``AT_OPTIMUM`` as soon as a gradient is exactly zero,
    ``CONVERGED`` on the relative gradient test and ``MAX_ITERS`` after
    ``stop.max_iters`` steps.
    """
    x = as_vector(x0, oracle.dim, "x0").copy()
    if isinstance(rule, PsiFamily) and oracle.problem is None:
        raise RuleInapplicable("the psi-family rule needs a quadratic problem")
    if isinstance(rule, PolyakGeneral) and oracle.f_gap(x) is None:
        raise RuleInapplicable("the Polyak rule needs the optimal value f_*")

    P = oracle.problem
    psi = rule_weight(rule) if P is not None else None
    x_star = oracle.optimal_point

    records = []
    g = oracle.gradient(x)
    g0_norm = float(np.linalg.norm(g))
    k = 0
    while True:
        gap = oracle.f_gap(x)
        gnorm = float(np.linalg.norm(g))
        dist = wdist = None
        if x_star is not None:
            e = x - x_star
            dist = float(e @ e)
            if P is not None:
                wdist = weighted_norm_sq(P, psi, e)

        if gnorm == 0.0:
            status = Termination.AT_OPTIMUM
        elif gnorm <= stop.grad_rel_tol * g0_norm:
            status = Termination.CONVERGED
        elif k >= stop.max_iters:
            status = Termination.MAX_ITERS
        else:
            status = None

        alpha = None if status is not None else compute_step(rule, oracle, x, g, gap)
        records.append(IterateRecord(k, x, gap, gnorm, dist, wdist, alpha))
        if status is not None:
            return Trace(tuple(records), status, rule)

        x = x - alpha * g
        if not np.all(np.isfinite(x)):
            raise NonFiniteIterate(f"iterate {k + 1} is not finite (alpha={alpha!r})")
        g = oracle.gradient(x)
        k += 1


def contraction_series(trace: Trace, metric: Metric) -> list[float]:
    """Ratios ``m_{k+1} / m_k`` of a recorded metric."""
    metric = Metric(metric)
    vals = trace.column(metric.value)
    if len(vals) < 2:
        return []
    if any(v is None for v in vals):
        raise MetricUnavailable(f"{metric.value} was not recorded for this trace")
    return [0.0 if abs(a) < RATIO_UNDERFLOW else b / a for a, b in zip(vals, vals[1:])]
