"""Benchmark matrix, result tables and the reference comparison.

A benchmark cell is a problem at a start scale solved by one method,
with or without line search.  run_matrix evaluates a list of cells into
table rows; emit_table renders them as markdown (grouped the way the
reference results are usually printed) or as csv that parse_csv reads
back losslessly.  compare_reference holds a row set against the shipped
expected-results file, data/reference_grid.txt.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .driver import SolverConfig, solve
from .kernel import VARIANTS
from .problems import make_problem, scale_start

__all__ = [
    "CheckReport",
    "ExperimentSpec",
    "FixtureRow",
    "METHOD_LABELS",
    "ReferenceFixture",
    "ResultRow",
    "compare_reference",
    "default_grid",
    "emit_table",
    "load_reference_fixture",
    "newton_reference_solve",
    "parse_csv",
    "parse_reference_fixture",
    "run_experiment",
    "run_matrix",
]

METHOD_LABELS = {
    "huang1": "huang1",
    "huang2": "huang2",
    "mod-huang1": "mod.huang1",
    "mod-huang2": "mod.huang2",
    "ilu": "implicit lu",
}
_SLUG_BY_LABEL = {label: slug for slug, label in METHOD_LABELS.items()}

DISPLAY_NAMES = {
    "rosenbrock": "Rosenbrock",
    "powell-singular": "Powell singular",
    "brown-almost-linear": "Brown almost linear",
    "schubert-broyden": "Schubert Broyden",
}

# a "converged" gate additionally demands the best residual be this small
CONVERGED_RESIDUAL_BOUND = 1e-12

CSV_COLUMNS = [
    "function",
    "n",
    "scale",
    "method",
    "line_search",
    "best_residual",
    "best_iteration",
    "total_iterations",
    "status",
    "time_seconds",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """One cell of the benchmark matrix.

    overrides is a tuple of (field, value) pairs applied on top of the
    precision preset; later pairs win, so cell-specific settings can be
    combined with user-supplied ones.
    """

    problem: str
    n: int | None = None
    scale: float = 1.0
    method: str = "mod-huang2"
    line_search: bool = False
    precision: int = 64
    overrides: tuple = ()

    def config(self) -> SolverConfig:
        return SolverConfig.for_precision(
            self.precision, line_search=self.line_search, **dict(self.overrides)
        )


@dataclass
class ResultRow:
    """One table line; fields mirror the csv columns."""

    function: str
    n: int
    scale: float
    method: str
    line_search: str
    best_residual: float
    best_iteration: int
    total_iterations: int
    status: str
    time_seconds: float
    detail: str = ""  # not serialised; reason when status is "(invalid)"


def run_experiment(spec: ExperimentSpec):
    """Run one cell; returns (ResultRow, SolveReport or None).

    A spec that cannot be executed (unknown problem or method, bad
    dimension, bad tolerances) comes back as a row with status
    "(invalid)" instead of raising, so one bad cell cannot take down a
    whole matrix run.
    """
    try:
        problem = make_problem(spec.problem, spec.n)
        variant = VARIANTS[spec.method]
        config = spec.config()
        x0 = scale_start(problem, spec.scale)
    except (KeyError, TypeError, ValueError) as exc:
        row = ResultRow(
            spec.problem,
            spec.n if spec.n is not None else 0,
            spec.scale,
            METHOD_LABELS.get(spec.method, spec.method),
            "on" if spec.line_search else "off",
            math.nan,
            0,
            0,
            "(invalid)",
            0.0,
            detail=str(exc),
        )
        return row, None
    started = time.perf_counter()
    report = solve(problem, x0, variant, config)
    elapsed = time.perf_counter() - started
    row = ResultRow(
        spec.problem,
        problem.n,
        spec.scale,
        METHOD_LABELS[spec.method],
        "on" if spec.line_search else "off",
        report.best_residual,
        report.best_iteration,
        report.total_iterations,
        report.status.flag,
        elapsed,
    )
    return row, report


def run_matrix(specs) -> list[ResultRow]:
    """Run every cell, returning rows in the order given.

    Cells are independent pure solves, so apart from wall times the
    output does not depend on execution order.
    """
    return [run_experiment(spec)[0] for spec in specs]


def default_grid(precision: int = 64, overrides: tuple = ()) -> list[ExperimentSpec]:
    """The benchmark matrix matching the shipped expected-results file.

    Every cell runs the plain precision preset (plus whatever overrides
    the caller passes); the published tables used one configuration
    throughout and so do we.
    """
    overrides = tuple(overrides)
    specs = []

    def add(problem, n, scale, method, line_search=False):
        specs.append(
            ExperimentSpec(
                problem,
                n,
                scale,
                method,
                line_search=line_search,
                precision=precision,
                overrides=overrides,
            )
        )

    for n in (2, 10, 100):
        for scale in (1.0, 1.1, 10.0, 100.0):
            for method in ("mod-huang1", "mod-huang2", "ilu"):
                add("rosenbrock", n, scale, method)

    for n, scales in ((10, (1.0, 10.0)), (50, (1.0, 10.0, 100.0)), (100, (1.0, 10.0, 100.0))):
        for scale in scales:
            for method in ("mod-huang1", "mod-huang2", "ilu"):
                add("schubert-broyden", n, scale, method)

    for scale in (1.0, 1.1, 10.0):
        for method in ("mod-huang1", "mod-huang2", "ilu"):
            add("brown-almost-linear", 4, scale, method)
    add("brown-almost-linear", 4, 100.0, "mod-huang1")
    add("brown-almost-linear", 4, 100.0, "mod-huang1", line_search=True)
    add("brown-almost-linear", 4, 100.0, "mod-huang2")
    add("brown-almost-linear", 4, 100.0, "mod-huang2", line_search=True)
    add("brown-almost-linear", 4, 100.0, "ilu")

    for scale in (1.0, 1.1):
        for method in ("mod-huang1", "mod-huang2", "ilu"):
            add("brown-almost-linear", 20, scale, method)
            add("brown-almost-linear", 20, scale, method, line_search=True)

    for scale in (1.0, 1.1, 10.0, 100.0):
        add("powell-singular", 4, scale, "mod-huang1")
        add("powell-singular", 4, scale, "mod-huang2")
        add("powell-singular", 4, scale, "ilu")
        add("powell-singular", 4, scale, "ilu", line_search=True)

    return specs


def emit_table(rows, table_format: str = "markdown") -> str:
    if table_format == "csv":
        return _emit_csv(rows)
    if table_format == "markdown":
        return _emit_markdown(rows)
    raise ValueError(f"unknown table format {table_format!r}")


def _emit_csv(rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.function,
                r.n,
                repr(float(r.scale)),
                r.method,
                r.line_search,
                repr(float(r.best_residual)),
                r.best_iteration,
                r.total_iterations,
                r.status,
                f"{r.time_seconds:.3f}",
            ]
        )
    return buffer.getvalue()


def parse_csv(text: str) -> list[ResultRow]:
    """Rows back from emit_table(rows, "csv") output."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_COLUMNS:
        raise ValueError("unexpected csv header")
    rows = []
    for record in reader:
        if not record:
            continue
        rows.append(
            ResultRow(
                record[0],
                int(record[1]),
                float(record[2]),
                record[3],
                record[4],
                float(record[5]),
                int(record[6]),
                int(record[7]),
                record[8],
                float(record[9]),
            )
        )
    return rows


def _scale_label(scale: float) -> str:
    return "x0" if scale == 1.0 else f"{scale:g}x0"


def _residual_label(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if value == 0.0:
        return "0.0"
    return f"{value:.1e}"


def _emit_markdown(rows) -> str:
    lines = []
    group = None
    for r in rows:
        if (r.function, r.n) != group:
            group = (r.function, r.n)
            name = DISPLAY_NAMES.get(r.function, r.function)
            if r.function == "rosenbrock" and r.n > 2:
                name = "Extended Rosenbrock"
            lines += [
                "",
                f"### {name} n={r.n}",
                "",
                "| start | method | best resid | flag | it_best | it | time |",
                "| --- | --- | --- | --- | --- | --- | --- |",
            ]
        method = r.method + (" line search" if r.line_search == "on" else "")
        lines.append(
            f"| {_scale_label(r.scale)} | {method} | {_residual_label(r.best_residual)} "
            f"| {r.status} | {r.best_iteration} | {r.total_iterations} "
            f"| {r.time_seconds:.2f} |"
        )
    return "\n".join(lines).lstrip("\n") + "\n"


@dataclass(frozen=True)
class FixtureRow:
    problem: str
    n: int
    scale: float
    method: str  # slug form
    line_search: bool
    published_iterations: int
    published_flag: str  # "" when the run converged
    published_residual: float
    gate: str


@dataclass(frozen=True)
class ReferenceFixture:
    rows: tuple[FixtureRow, ...]


def parse_reference_fixture(text: str) -> ReferenceFixture:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 9:
            raise ValueError(f"malformed fixture line: {line!r}")
        problem, n, scale, method, ls, it, flag, residual, gate = parts
        rows.append(
            FixtureRow(
                problem,
                int(n),
                float(scale),
                method,
                ls == "on",
                int(it),
                "" if flag == "-" else flag,
                float(residual.replace("d", "e").replace("D", "e")),
                gate,
            )
        )
    return ReferenceFixture(tuple(rows))


def load_reference_fixture() -> ReferenceFixture:
    text = resources.files("nlabs").joinpath("data/reference_grid.txt").read_text()
    return parse_reference_fixture(text)


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    failures: int
    checked: int
    lines: tuple[str, ...]


def _scale_key(scale: float) -> float:
    return round(float(scale), 6)


def _row_key(function, n, scale, method_slug, line_search_on):
    return (function, int(n), _scale_key(scale), method_slug, bool(line_search_on))


def _gate_failures(row: ResultRow, ref: FixtureRow, iter_tolerance: int) -> list[str]:
    gate = ref.gate
    problems = []

    def expect_converged(max_iterations):
        if row.status != "":
            problems.append(f"expected convergence, stopped {row.status}")
            return
        if row.total_iterations > max_iterations:
            problems.append(
                f"took {row.total_iterations} iterations, limit {max_iterations}"
            )
        if row.best_residual > CONVERGED_RESIDUAL_BOUND:
            problems.append(f"converged residual {row.best_residual:.1e} too large")

    if gate == "conv" or gate.startswith("conv:"):
        k = iter_tolerance if gate == "conv" else int(gate.split(":", 1)[1])
        expect_converged(ref.published_iterations + k)
        if row.status == "" and row.total_iterations < ref.published_iterations - k:
            problems.append(
                f"took {row.total_iterations} iterations, expected about "
                f"{ref.published_iterations}"
            )
    elif gate.startswith("conv<="):
        expect_converged(int(gate[6:]))
    elif gate.startswith("reach:"):
        _, max_it, bound = gate.split(":")
        if row.best_residual > float(bound):
            problems.append(f"best residual {row.best_residual:.1e} above {bound}")
        elif row.best_iteration > int(max_it):
            problems.append(
                f"residual target reached only at iteration {row.best_iteration}"
            )
    elif gate.startswith("div:"):
        if row.status not in ("(div)", "(max)"):
            problems.append(f"expected (div) or (max), got {row.status or 'converged'}")
        if not row.best_residual >= float(gate[4:]):
            problems.append(f"best residual {row.best_residual:.1e} unexpectedly small")
    elif gate.startswith("fail:"):
        if row.status == "":
            problems.append("unexpectedly converged")
        if not row.best_residual >= float(gate[5:]):
            problems.append(f"best residual {row.best_residual:.1e} unexpectedly small")
    elif gate.startswith("small:"):
        if not row.best_residual <= float(gate[6:]):
            problems.append(f"best residual {row.best_residual:.1e} above {gate[6:]}")
    else:
        raise ValueError(f"unknown gate {gate!r} in reference fixture")
    return problems


def compare_reference(rows, fixture: ReferenceFixture, iter_tolerance: int = 3) -> CheckReport:
    """Hold benchmark rows to the expected-results file, gate by gate.

    Every fixture row must have a matching benchmark row (same problem,
    size, scale, method, line-search setting) that satisfies its gate;
    extra benchmark rows are ignored.  iter_tolerance applies to plain
    "conv" gates only, the rest carry their own bounds.
    """
    by_key = {}
    for r in rows:
        slug = _SLUG_BY_LABEL.get(r.method, r.method)
        by_key[_row_key(r.function, r.n, r.scale, slug, r.line_search == "on")] = r
    lines = []
    failures = 0
    for ref in fixture.rows:
        label = (
            f"{ref.problem} n={ref.n} {_scale_label(ref.scale)} "
            f"{METHOD_LABELS.get(ref.method, ref.method)}"
            + (" line search" if ref.line_search else "")
        )
        row = by_key.get(_row_key(ref.problem, ref.n, ref.scale, ref.method, ref.line_search))
        if row is None:
            failures += 1
            lines.append(f"FAIL {label}: no benchmark row")
            continue
        if row.status == "(invalid)":
            failures += 1
            lines.append(f"FAIL {label}: cell did not run ({row.detail})")
            continue
        gate_problems = _gate_failures(row, ref, iter_tolerance)
        if gate_problems:
            failures += 1
            lines.append(f"FAIL {label}: " + "; ".join(gate_problems))
        else:
            lines.append(
                f"PASS {label}: it={row.total_iterations} "
                f"(expected {ref.published_iterations}) "
                f"best={_residual_label(row.best_residual)} "
                f"flag={row.status or 'none'}"
            )
    return CheckReport(failures == 0, failures, len(fixture.rows), tuple(lines))


def newton_reference_solve(oracle, x) -> np.ndarray:
    """One Newton step by dense elimination with partial pivoting.

    Assembles J(x) and F(x) row by row and solves J d = -F through
    numpy (LAPACK).  Deliberately independent of the sweep kernel: a
    frozen major iteration must land on the same point, which checks
    the kernel against textbook elimination.  Raises
    numpy.linalg.LinAlgError when J(x) is singular.
    """
    x = np.asarray(x, dtype=np.float64)
    n = int(oracle.n)
    jacobian = np.zeros((n, n))
    residual = np.zeros(n)
    for k in range(n):
        residual[k] = oracle.component_value(k, x)
        jacobian[k] = oracle.jacobian_row(k, x)
    return x + np.linalg.solve(jacobian, -residual)
