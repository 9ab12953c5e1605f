"""
Steepest descent against the Polyak step on diag{1, 100}
========================================================

Both methods share the same worst-case rate.  From (30, 1) steepest descent
zigzags at a fixed ratio while Polyak fluctuates below its bound.  Writes the
traces and an SVG plot into ./figure1_out.
"""
from pathlib import Path

from psigrad import io
from psigrad.cli import figure1

res = figure1()
out = Path("figure1_out")
io.write_trace_csv(res["sd"], out / "sd_trace.csv")
io.write_trace_csv(res["polyak"], out / "polyak_trace.csv")
io.atomic_write_text(out / "figure1.svg", io.render_log_svg(
    {"SD": res["sd"].column("f_gap"), "Polyak": res["polyak"].column("f_gap")}, "f(x_k) - f_*"))
for key, value in res["summary"].items():
    print(f"{key:18s} {value}")
print(f"written to {out.resolve()}")
