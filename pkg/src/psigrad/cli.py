"""Command-line front end.

    psigrad run --problem diag_1_100 --rule sd --out runs/sd
    psigrad certify --mu 1 --ell 100 --gamma 1 --sweep 100 --seed 42 --out cert
    psigrad figure1 --out fig
    psigrad asymptotics --problem spectrum_n5 --psi "power(-1)" --iters 1000 --out zz

Exit codes: 0 success, 1 certificate or assumption failure, 2 configuration
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import zigzag_analysis
from .certificates import (
    PolyakCase,
    els_certificate,
    els_proof_parameters,
    els_rate,
    els_residual_decomposition,
    polyak_case1_bound,
    polyak_case1_certificate,
    polyak_case2_certificate,
    polyak_case2_minimizer,
    polyak_case_split,
    polyak_case_threshold,
    theoretical_rate,
    worst_case_start,
)
from .errors import (
    AssumptionViolated,
    BracketFailure,
    ConfigurationError,
    InvalidClass,
    NegativeGap,
    NumericalFailure,
    PsiGradError,
)
from .oracles import quadratic_as_oracle
from .solver import Metric, StoppingRule, Termination, contraction_series, run
from .spectral import (
    QuadraticProblem,
    SpectralWeight,
    kantorovich_bound,
    kantorovich_ratio,
    quad_gap,
    quad_gradient,
)
from .stepsizes import PolyakGeneral, PsiFamily, gsd_step, parse_rule, parse_weight

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
DEFAULT_SEED = 42
# ratios averaged (geometrically) for the reported tail rate
TAIL = 10

# certify tolerances, per check family
TOL_IDENTITY = 1e-11
TOL_POLYAK = 1e-12
TOL_MINIMIZER = 1e-9
TOL_KANTOROVICH = 1e-12
TOL_EQUALITY = 1e-10
TOL_SLACK = 1e-12
TOL_SQUARES = 1e-20
WORST_CASE_ITERS = 50
DECOMPOSITION_STEPS = 10
NORMAL_FLOOR = 1e-280


def tail_rate(ratios) -> float | None:
    """Geometric mean of the last ``TAIL`` positive ratios."""
    vals = [r for r in ratios if r is not None and r > 0][-TAIL:]
    if not vals:
        return None
    return float(math.exp(sum(math.log(r) for r in vals) / len(vals)))


def _parse_x0(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ConfigurationError(f"--x0 must be a comma-separated list of numbers, got {text!r}") from None


def _stop(args) -> StoppingRule:
    try:
        return StoppingRule(args.tol, args.max_iters)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


# run


def cmd_run(args) -> int:
    oracle, x0 = io.load_oracle(args.problem)
    rule = parse_rule(args.rule)
    if args.x0 is not None:
        x0 = _parse_x0(args.x0)
    elif x0 is None:
        # no stored start: a seeded unit-normal perturbation of the minimizer
        rng = np.random.default_rng(args.seed)
        x0 = oracle.optimal_point + rng.standard_normal(oracle.dim)
    trace = run(oracle, rule, x0, _stop(args))
    rows = io.trace_rows(trace)
    metric = "ratio_fgap" if rows[0]["f_gap"] is not None else "ratio_distsq"
    summary = {
        "iterations": trace.iterations,
        "termination": trace.termination.value,
        "final_grad_norm": trace.records[-1].grad_norm,
        "observed_rate_tail": tail_rate(r[metric] for r in rows),
        "rule": str(rule),
    }
    out = Path(args.out)
    io.write_trace_csv(trace, out / "trace.csv")
    io.write_json(out / "summary.json", summary)
    print(f"{trace.termination.value} after {trace.iterations} iterations; "
          f"||g|| = {summary['final_grad_norm']:.3e}")
    return EXIT_OK


# certify


class _Ledger:
    """Largest residual seen per named check, with its tolerance."""

    def __init__(self):
        self.worst: dict[str, float] = {}
        self.tol: dict[str, float] = {}

    def add(self, name: str, value: float, tol: float) -> None:
        value = float(value)
        if math.isnan(value):
            value = math.inf
        self.tol[name] = tol
        self.worst[name] = max(self.worst.get(name, -math.inf), value)

    def failures(self) -> list[str]:
        return sorted(k for k, v in self.worst.items() if v > self.tol[k])

    def max_violation(self) -> float:
        return max(v - self.tol[k] for k, v in self.worst.items())


def _random_class(rng, size):
    mus = 10.0 ** rng.uniform(-2, 2, size)
    kappas = 10.0 ** rng.uniform(math.log10(1.01), 6, size)
    return mus, mus * kappas


def _random_spectrum(rng, mu, ell, n=5, b=True):
    inner = np.sort(rng.uniform(mu, ell, n - 2))
    return QuadraticProblem.from_eigenvalues([mu, *inner, ell],
                                             rng.standard_normal(n) if b else None)


def certify_suite(mu: float, ell: float, gamma: float, sweep: int, seed: int,
                  perturb_zeta1: float = 0.0) -> dict:
    if not (mu > 0 and ell > mu and math.isfinite(ell)):
        raise InvalidClass(f"need 0 < mu < L, got mu={mu}, L={ell}")
    rng = np.random.default_rng(seed)
    led = _Ledger()

    # multiplier identities at the requested class and over a random sweep
    base = els_proof_parameters(mu, ell)
    if perturb_zeta1:
        base = els_certificate(mu, ell, base.zeta1 * (1 + perturb_zeta1), base.zeta2,
                               base.zeta3, base.delta)
    for name, r in base.identity_residuals.items():
        led.add(name, r, TOL_IDENTITY)
    for m, L in zip(*_random_class(rng, sweep)):
        for norm in ("zeta3", "sum13"):
            for name, r in els_proof_parameters(m, L, norm).identity_residuals.items():
                led.add(name, r, TOL_IDENTITY)

    # Polyak multipliers at the requested class
    theo = theoretical_rate(mu, ell, gamma)
    lo, hi = gamma / ell, gamma / mu
    thr = polyak_case_threshold(gamma, mu, ell)
    # Case One is empty when L <= (2 - gamma) mu
    case1_steps = rng.uniform(max(lo, thr), hi, sweep) if thr < hi else []
    for a in case1_steps:
        if polyak_case_split(gamma, mu, ell, a) is not PolyakCase.ONE:
            continue
        c = polyak_case1_certificate(gamma, mu, ell, a)
        sigma_scale = max(abs(c.zeta1), abs(c.zeta2), abs(2 * gamma * c.zeta3))
        led.add("polyak_case1_sigma", abs(c.sigma) / sigma_scale, TOL_POLYAK)
        # zeta3 multiplies an equality and carries no sign constraint
        led.add("polyak_case1_zeta_negativity", max(-c.zeta1, -c.zeta2, 0.0), TOL_POLYAK)
        led.add("polyak_case1_condition", c.condition_residual, TOL_POLYAK)
        led.add("polyak_case1_bound_excess", c.per_alpha_bound - theo, TOL_POLYAK)
    worst = 2 * gamma / (ell + mu)
    case = polyak_case_split(gamma, mu, ell, worst)
    led.add("polyak_bound_at_worst_step",
            abs(polyak_case1_bound(gamma, mu, ell, worst) - theo), TOL_POLYAK)
    c2 = polyak_case2_certificate(gamma, mu, ell)
    led.add("polyak_case2_condition", c2.condition_residual, TOL_POLYAK)
    led.add("polyak_case2_bound", abs(c2.worst_bound - theo), TOL_POLYAK)
    led.add("polyak_case2_minimizer",
            abs(polyak_case2_minimizer(gamma, mu, ell) - worst) / worst, TOL_MINIMIZER)

    # Kantorovich bounds on a random spectrum spanning [mu, L]
    P = _random_spectrum(rng, mu, ell)
    kb = kantorovich_bound(mu, ell)
    weights = (SpectralWeight.identity(), SpectralWeight.power(-1),
               SpectralWeight.laurent({-1: 1.0, 0: 0.5, 1: 1.0 / ell}))
    for psi in weights:
        for g in rng.standard_normal((sweep, P.n)):
            k = kantorovich_ratio(P, psi, g)
            led.add("kantorovich_lower", kb - k, TOL_KANTOROVICH)
            led.add("kantorovich_upper", k - 1.0, TOL_KANTOROVICH)

    # worst-case equality on diag(mu, L)
    W = QuadraticProblem.from_eigenvalues([mu, ell])
    O = quadratic_as_oracle(W)
    equality = True
    for label, psi in (("sd", SpectralWeight.identity()), ("polyak", SpectralWeight.power(-1))):
        for g_, iters in ((1.0, WORST_CASE_ITERS), (gamma, 1)):
            tr = run(O, PsiFamily(psi, g_), worst_case_start(W, psi), StoppingRule(0.0, iters))
            m = tr.column("weighted_dist_sq")
            # ratios of subnormal values carry no relative accuracy
            ratios = [b / a for a, b in zip(m, m[1:]) if b > NORMAL_FLOOR]
            dev = max(abs(r - theoretical_rate(mu, ell, g_)) for r in ratios)
            led.add(f"worst_case_equality_{label}", dev, TOL_EQUALITY)
            equality = equality and dev <= TOL_EQUALITY

    # completed-square decomposition along exact line-search steps; b = 0 keeps
    # the iterates themselves equal to the errors, so gradients stay accurate
    for _ in range(sweep):
        Q = _random_spectrum(rng, mu, ell, b=False)
        _decomposition_steps(led, Q, rng.standard_normal(Q.n), DECOMPOSITION_STEPS)
    for sign in (1, -1):
        _decomposition_steps(led, W, worst_case_start(W, SpectralWeight.identity(), sign), 1,
                             squares=True)

    failures = led.failures()
    return {
        "params": {"mu": mu, "ell": ell, "gamma": gamma, "sweep": sweep, "seed": seed,
                   "perturb_zeta1": perturb_zeta1},
        "residuals": dict(sorted(led.worst.items())),
        "tolerances": dict(sorted(led.tol.items())),
        "max_violation": led.max_violation(),
        "equality_case": equality,
        "case": case.value,
        "failures": failures,
        "passed": not failures,
        "els_rate": els_rate(mu, ell),
        "theoretical_rate": theo,
    }


def _decomposition_steps(led: _Ledger, P: QuadraticProblem, x, steps: int,
                         squares: bool = False) -> None:
    g = quad_gradient(P, x)
    for _ in range(steps):
        if np.linalg.norm(g) < 1e-150:
            break
        x_new = x - gsd_step(P, 1.0, g) * g
        g_new = quad_gradient(P, x_new)
        slack, s1, s2 = els_residual_decomposition(
            P.mu, P.ell, x, x_new, g, g_new, P.x_star, quad_gap(P, x), quad_gap(P, x_new))
        led.add("decomposition_slack", slack, TOL_SLACK)
        if squares:
            led.add("decomposition_square1_worst_case", s1, TOL_SQUARES)
            led.add("decomposition_square2_worst_case", s2, TOL_SQUARES)
        x, g = x_new, g_new


def cmd_certify(args) -> int:
    report = certify_suite(args.mu, args.ell, args.gamma, args.sweep, args.seed,
                           args.perturb_zeta1)
    io.write_json(Path(args.out) / "certificate.json", report)
    if report["failures"]:
        print("violated: " + ", ".join(report["failures"]), file=sys.stderr)
        return EXIT_FAILED
    print(f"all {len(report['residuals'])} certificate checks within tolerance")
    return EXIT_OK


# figure1


def figure1(max_iters: int = 100_000, tol: float = 1e-8) -> dict:
    """Run SD and Polyak on diag{1, 100} from (30, 1); returns traces and the summary."""
    oracle, x0 = io.load_oracle("diag_1_100")
    stop = StoppingRule(tol, max_iters)
    sd = run(oracle, PsiFamily(SpectralWeight.identity(), 1.0), x0, stop)
    pk = run(oracle, PolyakGeneral(1.0), x0, stop)
    for name, tr in (("sd", sd), ("polyak", pk)):
        if tr.termination is Termination.MAX_ITERS:
            raise NumericalFailure(f"{name} did not converge within {max_iters} iterations")
    summary = {
        "iters_sd": sd.iterations,
        "iters_polyak": pk.iterations,
        "tail_rate_sd": tail_rate(contraction_series(sd, Metric.FGAP)),
        "tail_rate_polyak": tail_rate(contraction_series(pk, Metric.FGAP)),
    }
    return {"sd": sd, "polyak": pk, "summary": summary}


def cmd_figure1(args) -> int:
    res = figure1(args.max_iters, args.tol)
    out = Path(args.out)
    io.write_trace_csv(res["sd"], out / "sd_trace.csv")
    io.write_trace_csv(res["polyak"], out / "polyak_trace.csv")
    svg = io.render_log_svg({"SD": res["sd"].column("f_gap"),
                             "Polyak": res["polyak"].column("f_gap")},
                            ylabel="f(x_k) - f_*", title="A = diag{1, 100}, x0 = (30, 1)")
    io.atomic_write_text(out / "figure1.svg", svg)
    io.write_json(out / "figure1.json", res["summary"])
    s = res["summary"]
    print(f"SD: {s['iters_sd']} iterations, tail rate {s['tail_rate_sd']:.7f}; "
          f"Polyak: {s['iters_polyak']} iterations, tail rate {s['tail_rate_polyak']:.7f}")
    return EXIT_OK


# asymptotics

MAX_REJECTIONS = 100
MIDDLE_MASS_TOL = 1e-6
C_GAP_TOL = 1e-4


def asymptotics(problem, psi: SpectralWeight, iters: int, seed: int):
    oracle, _ = io.load_oracle(problem)
    P = oracle.problem
    if P is None:
        raise ConfigurationError("the zigzag analysis needs a quadratic problem")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REJECTIONS):
        x0 = P.x_star + rng.standard_normal(P.n)
        g0 = oracle.gradient(x0)
        if g0[0] != 0 and g0[-1] != 0:
            break
    else:
        raise AssumptionViolated(
            f"no start with nonzero extreme gradient components in {MAX_REJECTIONS} draws")
    trace = run(oracle, PsiFamily(psi, 1.0), x0, StoppingRule(0.0, iters))
    return zigzag_analysis(trace, P, psi)


def cmd_asymptotics(args) -> int:
    if args.iters < 1:
        raise ConfigurationError("--iters must be positive")
    report = asymptotics(args.problem, parse_weight(args.psi), args.iters, args.seed)
    data = report.to_dict()
    io.write_json(Path(args.out) / "asymptotics.json", data)
    mid = max(report.middle_mass_even, report.middle_mass_odd)
    ok = mid <= MIDDLE_MASS_TOL and report.c_relative_gap <= C_GAP_TOL
    print(f"c = {report.c_even:.12g} (odd-iterate estimate {report.c_odd:.12g}); "
          f"middle mass {mid:.3e}")
    return EXIT_OK if ok else EXIT_FAILED


# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psigrad", description=__doc__.split("\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem_default=None, out_default="."):
        p.add_argument("--problem", default=problem_default,
                       required=problem_default is None,
                       help="problem JSON path, inline JSON, or bundled fixture name")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", default=out_default, help="output directory")

    p = sub.add_parser("run", help="iterate one stepsize rule and write the trace")
    common(p)
    p.add_argument("--rule", default="sd",
                   help="sd[:gamma=G] | polyak[:gamma=G] | family:psi=W[:gamma=G] | els[:tol=T]")
    p.add_argument("--x0", help="comma-separated start (default: stored x0 or seeded)")
    p.add_argument("--tol", type=float, default=1e-8, help="relative gradient tolerance")
    p.add_argument("--max-iters", type=int, default=100_000)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("certify", help="evaluate the rate certificates for a class")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--ell", type=float, default=100.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--sweep", type=int, default=100, help="random samples per sweep")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=".")
    p.add_argument("--perturb-zeta1", type=float, default=0.0,
                   help="debug: relative perturbation of zeta1 (should make certify fail)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("figure1", help="SD versus Polyak on diag{1, 100}")
    p.add_argument("--out", default=".")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("asymptotics", help="zigzag limit of the gamma = 1 family")
    common(p, problem_default="spectrum_n5")
    p.add_argument("--psi", default="identity", help="identity | power(p) | laurent(d=c,...)")
    p.add_argument("--iters", type=int, default=1000)
    p.set_defaults(func=cmd_asymptotics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PsiGradError as exc:
        # a failed bracket or a negative gap means the problem data is inconsistent
        code = EXIT_NUMERICAL if isinstance(exc, (BracketFailure, NegativeGap)) else EXIT_FAILED
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
