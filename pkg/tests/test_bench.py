import math
import random

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nlabs.bench import (
    CSV_COLUMNS,
    METHOD_LABELS,
    ExperimentSpec,
    FixtureRow,
    ReferenceFixture,
    ResultRow,
    compare_reference,
    default_grid,
    emit_table,
    load_reference_fixture,
    newton_reference_solve,
    parse_csv,
    parse_reference_fixture,
    run_experiment,
    run_matrix,
)
from nlabs.problems import make_linear_system, make_problem

KNOWN_GATES = ("conv", "conv:", "conv<=", "reach:", "div:", "fail:", "small:")


def _row(**kwargs):
    base = dict(
        function="rosenbrock",
        n=2,
        scale=1.0,
        method="mod.huang2",
        line_search="off",
        best_residual=1e-16,
        best_iteration=1,
        total_iterations=1,
        status="",
        time_seconds=0.125,
    )
    base.update(kwargs)
    return ResultRow(**base)


def _ref(**kwargs):
    base = dict(
        problem="rosenbrock",
        n=2,
        scale=1.0,
        method="mod-huang2",
        line_search=False,
        published_iterations=1,
        published_flag="",
        published_residual=2.2e-16,
        gate="conv:2",
    )
    base.update(kwargs)
    return FixtureRow(**base)


class TestExperimentSpec:
    def test_config_applies_precision_preset(self):
        spec = ExperimentSpec("rosenbrock", precision=32)
        config = spec.config()
        assert config.eps == 1e-6
        assert config.precision == 32

    def test_line_search_reaches_config(self):
        assert ExperimentSpec("rosenbrock", line_search=True).config().line_search

    def test_later_overrides_win(self):
        spec = ExperimentSpec("rosenbrock", overrides=(("itmax", 7), ("itmax", 9)))
        assert spec.config().itmax == 9


class TestRunExperiment:
    def test_successful_cell(self):
        row, report = run_experiment(ExperimentSpec("rosenbrock", 2))
        assert report is not None
        assert row.function == "rosenbrock"
        assert row.method == "mod.huang2"
        assert row.line_search == "off"
        assert row.status == ""
        assert row.total_iterations == 1
        assert row.time_seconds >= 0.0

    @pytest.mark.parametrize(
        "spec",
        [
            ExperimentSpec("beale"),
            ExperimentSpec("rosenbrock", method="newton"),
            ExperimentSpec("rosenbrock", 3),
            ExperimentSpec("rosenbrock", scale=-1.0),
            ExperimentSpec("rosenbrock", overrides=(("t", 0.0),)),
        ],
    )
    def test_unrunnable_cell_reports_invalid(self, spec):
        row, report = run_experiment(spec)
        assert report is None
        assert row.status == "(invalid)"
        assert row.detail
        assert math.isnan(row.best_residual)

    def test_order_independence(self):
        specs = [
            ExperimentSpec("rosenbrock", 2, method=m)
            for m in ("mod-huang1", "mod-huang2", "ilu")
        ] + [ExperimentSpec("brown-almost-linear", 4), ExperimentSpec("schubert-broyden", 10)]
        shuffled = specs[:]
        random.Random(59).shuffle(shuffled)

        def key_map(rows):
            out = {}
            for r in rows:
                r.time_seconds = 0.0
                out[(r.function, r.n, r.scale, r.method, r.line_search)] = r
            return out

        assert key_map(run_matrix(specs)) == key_map(run_matrix(shuffled))


class TestDefaultGrid:
    def test_cell_count_and_uniqueness(self):
        grid = default_grid()
        keys = {(s.problem, s.n, s.scale, s.method, s.line_search) for s in grid}
        assert len(grid) == 102
        assert len(keys) == 102

    def test_matches_fixture_exactly(self):
        grid_keys = {
            (s.problem, s.n, round(s.scale, 6), s.method, s.line_search)
            for s in default_grid()
        }
        fixture_keys = {
            (r.problem, r.n, round(r.scale, 6), r.method, r.line_search)
            for r in load_reference_fixture().rows
        }
        assert grid_keys == fixture_keys

    def test_precision_and_overrides_propagate(self):
        grid = default_grid(32, (("itmax", 5),))
        assert all(s.precision == 32 for s in grid)
        assert all(s.config().itmax == 5 for s in grid)


class TestCsvRoundTrip:
    def test_header(self):
        text = emit_table([], "csv")
        assert text.splitlines() == [",".join(CSV_COLUMNS)]

    def test_lossless_round_trip(self):
        rows = [
            _row(best_residual=2.220446049250313e-16),
            _row(scale=1.1, best_residual=0.0, status="(x)"),
            _row(
                function="powell-singular",
                n=4,
                method="implicit lu",
                line_search="on",
                best_residual=5.759202489626655e-16,
                best_iteration=30,
                total_iterations=30,
            ),
            _row(status="(invalid)", best_residual=math.nan, total_iterations=0),
        ]
        back = parse_csv(emit_table(rows, "csv"))
        assert len(back) == len(rows)
        for original, parsed in zip(rows, back):
            for field in CSV_COLUMNS:
                a, b = getattr(original, field), getattr(parsed, field)
                if isinstance(a, float) and math.isnan(a):
                    assert math.isnan(b)
                else:
                    assert a == b, field

    def test_unexpected_header_rejected(self):
        with pytest.raises(ValueError):
            parse_csv("function,n\nrosenbrock,2\n")

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            emit_table([], "latex")


class TestMarkdownTable:
    def test_grouping_and_labels(self):
        rows = [
            _row(),
            _row(scale=10.0, method="implicit lu", line_search="on", status="(o)"),
            _row(function="rosenbrock", n=10, best_residual=0.0),
        ]
        text = emit_table(rows, "markdown")
        assert "### Rosenbrock n=2" in text
        assert "### Extended Rosenbrock n=10" in text
        assert "| start | method | best resid | flag | it_best | it | time |" in text
        assert "| x0 | mod.huang2 | 1.0e-16 |" in text
        assert "| 10x0 | implicit lu line search |" in text
        assert "| (o) |" in text
        assert "| 0.0 |" in text

    def test_two_significant_digit_residuals(self):
        text = emit_table([_row(best_residual=5.759202489626655e-16)], "markdown")
        assert "5.8e-16" in text


class TestReferenceFixtureParsing:
    def test_shipped_fixture(self):
        fixture = load_reference_fixture()
        assert len(fixture.rows) == 102
        for row in fixture.rows:
            assert row.method in METHOD_LABELS
            assert row.published_iterations >= 0
            assert row.published_flag in ("", "(x)", "(o)", "(div)", "(max)")
            assert math.isfinite(row.published_residual)
            assert row.gate == "conv" or row.gate.startswith(KNOWN_GATES[1:])

    def test_d_exponent_notation(self):
        text = (
            "# comment line\n"
            "\n"
            "rosenbrock 2 1.0 mod-huang2 off 1 - 0.22d-15 conv:2\n"
            "powell-singular 4 10.0 ilu off 100 (div) 0.38D+02 div:1\n"
        )
        rows = parse_reference_fixture(text).rows
        assert len(rows) == 2
        assert rows[0].published_residual == pytest.approx(0.22e-15, rel=1e-15)
        assert rows[0].published_flag == ""
        assert not rows[0].line_search
        assert rows[1].published_residual == pytest.approx(38.0)
        assert rows[1].published_flag == "(div)"

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError, match="malformed"):
            parse_reference_fixture("rosenbrock 2 1.0\n")


class TestCompareReference:
    def _check(self, row, ref, iter_tolerance=3):
        rows = [] if row is None else [row]
        return compare_reference(rows, ReferenceFixture((ref,)), iter_tolerance)

    def test_conv_gate_accepts_nearby_iteration_count(self):
        ref = _ref(gate="conv", published_iterations=5)
        assert self._check(_row(total_iterations=7), ref).passed
        assert not self._check(_row(total_iterations=9), ref).passed
        assert not self._check(_row(total_iterations=1), ref).passed
        assert self._check(_row(total_iterations=9), ref, iter_tolerance=4).passed

    def test_conv_gate_requires_convergence_and_small_residual(self):
        ref = _ref(gate="conv", published_iterations=1)
        assert not self._check(_row(status="(o)"), ref).passed
        assert not self._check(_row(best_residual=1e-10), ref).passed

    def test_conv_with_explicit_tolerance_ignores_argument(self):
        ref = _ref(gate="conv:1", published_iterations=5)
        assert not self._check(_row(total_iterations=7), ref, iter_tolerance=10).passed
        assert self._check(_row(total_iterations=6), ref, iter_tolerance=0).passed

    def test_conv_upper_bound_gate(self):
        ref = _ref(gate="conv<=250", published_iterations=200)
        assert self._check(_row(total_iterations=250), ref).passed
        assert not self._check(_row(total_iterations=251), ref).passed
        assert self._check(_row(total_iterations=1), ref).passed

    def test_reach_gate_checks_best_not_status(self):
        ref = _ref(gate="reach:80:1e-13", published_iterations=44)
        good = _row(status="(o)", best_residual=5e-14, best_iteration=35)
        assert self._check(good, ref).passed
        late = _row(status="", best_residual=5e-14, best_iteration=81)
        assert not self._check(late, ref).passed
        weak = _row(status="", best_residual=1e-12, best_iteration=10)
        assert not self._check(weak, ref).passed

    def test_div_gate(self):
        ref = _ref(gate="div:1", published_iterations=100)
        assert self._check(_row(status="(div)", best_residual=38.0), ref).passed
        assert self._check(_row(status="(max)", best_residual=2.0), ref).passed
        report = self._check(_row(status="", best_residual=1e-16), ref)
        assert not report.passed
        assert "got converged" in report.lines[0]

    def test_fail_gate(self):
        ref = _ref(gate="fail:0.5", published_iterations=1)
        assert self._check(_row(status="(x)", best_residual=1.0), ref).passed
        assert not self._check(_row(status="", best_residual=1.0), ref).passed
        assert not self._check(_row(status="(x)", best_residual=0.1), ref).passed

    def test_small_gate_ignores_flag(self):
        ref = _ref(gate="small:1e-13", published_iterations=12)
        assert self._check(_row(status="(o)", best_residual=1e-14), ref).passed
        assert not self._check(_row(status="(o)", best_residual=1e-12), ref).passed

    def test_missing_and_invalid_rows_fail(self):
        report = self._check(None, _ref())
        assert not report.passed
        assert "no benchmark row" in report.lines[0]
        bad = _row(status="(invalid)")
        bad.detail = "unknown problem"
        report = self._check(bad, _ref())
        assert "did not run" in report.lines[0]

    def test_unknown_gate_rejected(self):
        with pytest.raises(ValueError, match="unknown gate"):
            self._check(_row(), _ref(gate="magic:3"))

    def test_report_shape(self):
        refs = ReferenceFixture((_ref(), _ref(scale=10.0, gate="div:1")))
        report = compare_reference([_row()], refs)
        assert report.checked == 2
        assert report.failures == 1
        assert len(report.lines) == 2
        assert report.lines[0].startswith("PASS")
        assert "it=1" in report.lines[0]
        assert report.lines[1].startswith("FAIL")


class TestNewtonReference:
    def test_rosenbrock_step_by_hand_elimination(self):
        # J = [[-1, 0], [24, 10]], -F = (-2.2, 4.4): back substitution
        # gives d = (2.2, -4.84), so the step lands on (1, -3.84)
        p = make_problem("rosenbrock")
        assert_allclose(
            newton_reference_solve(p, p.standard_start), [1.0, -3.84], rtol=0, atol=1e-12
        )

    def test_linear_system_solved_exactly(self):
        rng = np.random.default_rng(61)
        a = 5.0 * np.eye(5) + rng.uniform(-1.0, 1.0, (5, 5))
        b = rng.uniform(-1.0, 1.0, 5)
        out = newton_reference_solve(make_linear_system(a, b), rng.standard_normal(5))
        assert_allclose(out, np.linalg.solve(a, b), rtol=1e-10, atol=1e-12)

    def test_singular_jacobian_raises(self):
        p = make_linear_system([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0])
        with pytest.raises(np.linalg.LinAlgError):
            newton_reference_solve(p, np.zeros(2))
