"""Problem files, trace CSVs, JSON reports and the comparison SVG.

Problem files are JSON objects with a ``kind`` discriminator::

    {"kind": "quadratic", "eigenvalues": [...], "b": [...], "x0": [...]}
    {"kind": "lse_ridge", "rows": [[...], ...], "tau": 0.5, "mu0": 0.05,
     "anchor": [...]}

``kind`` defaults to ``"quadratic"`` and ``x0`` is optional.  Bundled
fixtures can be named without a path (``diag_1_100``, ``spectrum_n5``,
``lse_ridge``).
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DimensionMismatch
from .oracles import SmoothStronglyConvexOracle, lse_ridge_oracle, quadratic_as_oracle
from .solver import RATIO_UNDERFLOW, Trace
from .spectral import QuadraticProblem, SpectralWeight

__all__ = [
    "TRACE_COLUMNS",
    "fixture_names",
    "load_problem_spec",
    "oracle_from_spec",
    "load_oracle",
    "weight_to_dict",
    "weight_from_dict",
    "trace_rows",
    "format_trace_csv",
    "write_trace_csv",
    "read_trace_csv",
    "dumps_json",
    "write_json",
    "atomic_write_text",
    "render_log_svg",
]

TRACE_COLUMNS = ("k", "f_gap", "grad_norm", "dist_sq", "weighted_dist_sq", "alpha",
                 "ratio_fgap", "ratio_distsq")


def fixture_names() -> list[str]:
    root = resources.files("psigrad") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_problem_spec(source: str | os.PathLike | Mapping) -> dict:
    """Read a problem definition from a dict, inline JSON, a path or a fixture name."""
    if isinstance(source, Mapping):
        return dict(source)
    text = str(source).strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"inline problem is not valid JSON: {exc}") from None
    path = Path(text)
    if not path.exists():
        name = text[:-5] if text.endswith(".json") else text
        if name in fixture_names():
            path = resources.files("psigrad") / "fixtures" / f"{name}.json"
        else:
            raise ConfigurationError(
                f"no problem file {text!r} (bundled: {', '.join(fixture_names())})")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{text}: not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{text}: expected a JSON object")
    return data


def _floats(spec: Mapping, key: str) -> list[float]:
    try:
        return [float(v) for v in spec[key]]
    except KeyError:
        raise ConfigurationError(f"problem is missing {key!r}") from None
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key!r} must be a list of numbers") from None


def oracle_from_spec(spec: Mapping) -> tuple[SmoothStronglyConvexOracle, np.ndarray | None]:
    """Build the oracle and return it with the optional stored start ``x0``."""
    kind = spec.get("kind", "quadratic")
    if kind == "quadratic":
        eigs = _floats(spec, "eigenvalues")
        b = _floats(spec, "b") if "b" in spec else None
        P = QuadraticProblem.from_eigenvalues(eigs, b, relaxed=bool(spec.get("relaxed", False)))
        oracle = quadratic_as_oracle(P)
    elif kind == "lse_ridge":
        try:
            rows = np.asarray(spec["rows"], dtype=float)
            tau, mu0 = float(spec["tau"]), float(spec["mu0"])
        except KeyError as exc:
            raise ConfigurationError(f"lse_ridge problem is missing {exc}") from None
        except (TypeError, ValueError):
            raise ConfigurationError("lse_ridge rows/tau/mu0 must be numeric") from None
        oracle = lse_ridge_oracle(rows, tau, mu0, _floats(spec, "anchor"))
    else:
        raise ConfigurationError(f"unknown problem kind {kind!r}")
    x0 = None
    if "x0" in spec:
        x0 = np.asarray(_floats(spec, "x0"))
        if x0.shape != (oracle.dim,):
            raise DimensionMismatch(f"x0 has length {x0.size}, problem dimension is {oracle.dim}")
    return oracle, x0


def load_oracle(source) -> tuple[SmoothStronglyConvexOracle, np.ndarray | None]:
    return oracle_from_spec(load_problem_spec(source))


def weight_to_dict(psi: SpectralWeight) -> dict:
    if psi.describe() == "identity":
        return {"variant": "identity"}
    if psi.p is not None:
        return {"variant": "power", "p": psi.p}
    return {"variant": "laurent", "coeffs": {str(d): c for d, c in psi.coeffs}}


def weight_from_dict(data: Mapping) -> SpectralWeight:
    variant = data.get("variant")
    try:
        if variant == "identity":
            return SpectralWeight.identity()
        if variant == "power":
            return SpectralWeight.power(int(data["p"]))
        if variant == "laurent":
            return SpectralWeight.laurent({int(k): float(v) for k, v in data["coeffs"].items()})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed weight {dict(data)!r}: {exc}") from None
    raise ConfigurationError(f"unknown weight variant {variant!r}")


# traces


def _ratios(vals: Sequence[float | None]) -> list[float | None]:
    out: list[float | None] = [None]
    for a, b in zip(vals, vals[1:]):
        if a is None or b is None:
            out.append(None)
        else:
            out.append(0.0 if abs(a) < RATIO_UNDERFLOW else b / a)
    return out


def trace_rows(trace: Trace) -> list[dict]:
    """One dict per record, including ``ratio_* = m_k / m_{k-1}`` (None at k = 0)."""
    rf = _ratios(trace.column("f_gap"))
    rd = _ratios(trace.column("dist_sq"))
    rows = []
    for rec, a, b in zip(trace.records, rf, rd):
        rows.append({"k": rec.k, "f_gap": rec.f_gap, "grad_norm": rec.grad_norm,
                     "dist_sq": rec.dist_sq, "weighted_dist_sq": rec.weighted_dist_sq,
                     "alpha": rec.alpha, "ratio_fgap": a, "ratio_distsq": b})
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def format_trace_csv(trace: Trace) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    for row in trace_rows(trace):
        lines.append(",".join(_cell(row[c]) for c in TRACE_COLUMNS))
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: Trace, path) -> None:
    atomic_write_text(path, format_trace_csv(trace))


def read_trace_csv(path) -> list[dict]:
    """Parse a trace CSV back into dicts (empty cells become None)."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    out = []
    for line in lines[1:]:
        cells = line.split(",")
        row = {}
        for name, cell in zip(header, cells):
            if cell == "":
                row[name] = None
            elif name == "k":
                row[name] = int(cell)
            else:
                row[name] = float(cell)
        out.append(row)
    return out


# JSON


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps_json(obj))


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# SVG

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def render_log_svg(series: Mapping[str, Sequence[float | None]], ylabel: str,
                   title: str = "", width: int = 640, height: int = 400) -> str:
    """Polylines of ``log10(value)`` against the record index, one per series.

    Nonpositive and missing values are skipped.
    """
    pts = {name: [(k, math.log10(v)) for k, v in enumerate(vals) if v is not None and v > 0]
           for name, vals in series.items()}
    all_pts = [p for ps in pts.values() for p in ps]
    if not all_pts:
        raise ValueError("nothing to plot: no positive values")
    kmax = max(max(k for k, _ in all_pts), 1)
    ylo = math.floor(min(y for _, y in all_pts))
    yhi = math.ceil(max(y for _, y in all_pts))
    if yhi == ylo:
        yhi += 1
    left, right, top, bottom = 70, 20, 30, 45
    pw, ph = width - left - right, height - top - bottom

    def sx(k):
        return left + pw * k / kmax

    def sy(y):
        return top + ph * (yhi - y) / (yhi - ylo)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    step = max(1, (yhi - ylo) // 8)
    for e in range(ylo, yhi + 1, step):
        y = sy(e)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" '
                   f'stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">1e{e}</text>')
    for i in range(6):
        k = kmax * i / 5
        out.append(f'<text x="{sx(k):.2f}" y="{top + ph + 16}" text-anchor="middle">'
                   f'{k:.0f}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 8}" text-anchor="middle">k</text>')
    out.append(f'<text x="14" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2})">{ylabel}</text>')
    if title:
        out.append(f'<text x="{left + pw / 2}" y="18" text-anchor="middle">{title}</text>')
    for i, (name, ps) in enumerate(pts.items()):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{sx(k):.2f},{sy(y):.2f}" for k, y in ps)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 90}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 84}" y="{ly}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
