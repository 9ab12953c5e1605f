import json
import math

import numpy as np
import pytest

from psigrad import io
from psigrad.errors import ConfigurationError, DimensionMismatch
from psigrad.oracles import quadratic_as_oracle
from psigrad.solver import StoppingRule, run
from psigrad.spectral import QuadraticProblem, SpectralWeight
from psigrad.stepsizes import PsiFamily


class TestProblems:
    def test_bundled_fixtures(self):
        assert set(io.fixture_names()) >= {"diag_1_100", "spectrum_n5", "lse_ridge"}
        O, x0 = io.load_oracle("diag_1_100")
        assert (O.mu, O.ell) == (1.0, 100.0)
        np.testing.assert_array_equal(x0, [30.0, 1.0])
        O, x0 = io.load_oracle("spectrum_n5.json")
        assert O.dim == 5 and x0 is None

    def test_inline_and_path(self, tmp_path):
        text = '{"eigenvalues": [2, 5], "b": [2, 5]}'
        O, _ = io.load_oracle(text)
        np.testing.assert_array_equal(O.optimal_point, [1, 1])
        p = tmp_path / "p.json"
        p.write_text(text)
        assert io.load_oracle(str(p))[0].ell == 5.0
        O, _ = io.load_oracle({"eigenvalues": [1, 1, 3], "relaxed": True})
        assert O.dim == 3

    @pytest.mark.parametrize("source", [
        "{not json", "no_such_fixture", "[1, 2]", '{"kind": "cubic", "eigenvalues": [1, 2]}',
        '{"b": [0, 0]}', '{"eigenvalues": ["a", 2]}', '{"kind": "lse_ridge", "rows": [[1, 0]]}',
        '{"eigenvalues": [2, 1]}',
    ])
    def test_configuration_errors(self, source):
        with pytest.raises(ConfigurationError):
            io.load_oracle(source)

    def test_x0_length(self):
        with pytest.raises(DimensionMismatch):
            io.load_oracle('{"eigenvalues": [1, 2], "x0": [1, 2, 3]}')


class TestWeights:
    @pytest.mark.parametrize("psi", [SpectralWeight.identity(), SpectralWeight.power(-1),
                                     SpectralWeight.laurent({-1: 0.25, 2: 3.0})],
                             ids=lambda w: w.describe())
    def test_round_trip(self, psi):
        d = io.weight_to_dict(psi)
        assert io.weight_from_dict(json.loads(json.dumps(d))) == psi

    @pytest.mark.parametrize("data", [{"variant": "exp"}, {"variant": "power"},
                                      {"variant": "laurent", "coeffs": {"x": 1}}])
    def test_malformed(self, data):
        with pytest.raises(ConfigurationError):
            io.weight_from_dict(data)


class TestTraceCsv:
    @pytest.fixture
    def trace(self):
        O = quadratic_as_oracle(QuadraticProblem.from_eigenvalues([1, 100]))
        return run(O, PsiFamily(), [30.0, 1.0], StoppingRule(0.0, 5))

    def test_format(self, trace):
        text = io.format_trace_csv(trace)
        lines = text.splitlines()
        assert lines[0] == ",".join(io.TRACE_COLUMNS)
        assert len(lines) == len(trace) + 1
        first = dict(zip(io.TRACE_COLUMNS, lines[1].split(",")))
        assert first["k"] == "0" and first["f_gap"] == "500"
        assert first["ratio_fgap"] == "" and first["ratio_distsq"] == ""
        assert lines[-1].split(",")[io.TRACE_COLUMNS.index("alpha")] == ""

    def test_round_trip_is_exact(self, trace, tmp_path):
        path = tmp_path / "t.csv"
        io.write_trace_csv(trace, path)
        rows = io.read_trace_csv(path)
        for rec, row in zip(trace.records, rows):
            assert row["f_gap"] == rec.f_gap and row["alpha"] == rec.alpha
        for a, b in zip(rows, rows[1:]):
            assert b["ratio_fgap"] == b["f_gap"] / a["f_gap"]

    def test_ratio_on_reaching_the_minimizer(self):
        O = quadratic_as_oracle(QuadraticProblem.from_eigenvalues([1, 100]))
        rows = io.trace_rows(run(O, PsiFamily(), [1.0, 0.0], StoppingRule(0.0, 3)))
        assert rows[1]["f_gap"] == 0.0 and rows[1]["ratio_fgap"] == 0.0


class TestJson:
    def test_numpy_and_non_finite(self, tmp_path):
        data = {"b": np.float64(0.1), "a": np.arange(2), "n": np.int64(3), "inf": math.inf}
        text = io.dumps_json(data)
        back = json.loads(text)
        assert back == {"a": [0, 1], "b": 0.1, "inf": "inf", "n": 3}
        assert text.index('"a"') < text.index('"b"')
        path = tmp_path / "sub" / "x.json"
        io.write_json(path, data)
        assert path.read_text() == text
        assert [p.name for p in path.parent.iterdir()] == ["x.json"]


class TestSvg:
    def test_render(self):
        svg = io.render_log_svg({"a": [1.0, 0.1, 0.01, None, 0.0], "b": [10.0, 1.0]}, "gap", "t")
        assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
        assert svg.count("<polyline") == 2
        assert ">1e-2<" in svg and ">1e1<" in svg

    def test_nothing_to_plot(self):
        with pytest.raises(ValueError):
            io.render_log_svg({"a": [0.0, None]}, "gap")
