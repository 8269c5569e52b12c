"""HTTP surface wrapping the solver library.

Everything here is a pure request: no state survives between calls, so
the app can equally run in-process (the CLI does this through the ASGI
test client) or behind a real server.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..bench import (
    ExperimentSpec,
    compare_reference,
    default_grid,
    emit_table,
    load_reference_fixture,
    run_experiment,
    run_matrix,
)
from ..problems import ADMISSIBLE, PROBLEMS, make_problem
from .models import (
    CheckRequest,
    CheckResponse,
    GridRequest,
    GridResponse,
    ProblemInfo,
    ReportOut,
    RowOut,
    SolveRequest,
    SolveResponse,
    TraceEntryOut,
)

app = FastAPI(title="nlabs solver service", version=__version__)


def _spec_from_request(req: SolveRequest) -> ExperimentSpec:
    return ExperimentSpec(
        problem=req.problem,
        n=req.n,
        scale=req.scale,
        method=req.method,
        line_search=req.line_search,
        precision=req.options.precision,
        overrides=req.options.overrides(),
    )


def _row_out(row) -> RowOut:
    return RowOut(
        function=row.function,
        n=row.n,
        scale=row.scale,
        method=row.method,
        line_search=row.line_search,
        best_residual=row.best_residual,
        best_iteration=row.best_iteration,
        total_iterations=row.total_iterations,
        status=row.status,
        time_seconds=row.time_seconds,
    )


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.get("/problems", response_model=list[ProblemInfo])
def problems():
    infos = []
    for slug in sorted(PROBLEMS):
        problem = make_problem(slug)
        infos.append(
            ProblemInfo(
                name=slug,
                default_n=problem.n,
                admissible=ADMISSIBLE[slug],
                standard_start=[float(v) for v in problem.standard_start],
            )
        )
    return infos


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(req: SolveRequest):
    row, report = run_experiment(_spec_from_request(req))
    if report is None:
        raise HTTPException(status_code=422, detail=row.detail or "invalid request")
    report_out = ReportOut(
        status=report.status.flag,
        best_residual=report.best_residual,
        best_iteration=report.best_iteration,
        total_iterations=report.total_iterations,
        final_x=[float(v) for v in report.final_x],
        component_evals=report.component_evals,
        jacobian_element_evals=report.jacobian_element_evals,
        trace=[TraceEntryOut(**vars(entry)) for entry in report.trace]
        if req.include_trace
        else None,
    )
    return SolveResponse(row=_row_out(row), report=report_out)


@app.post("/grid", response_model=GridResponse)
def grid_endpoint(req: GridRequest):
    if req.specs is None:
        extra = req.options.overrides() if req.options is not None else ()
        specs = default_grid(precision=req.precision, overrides=extra)
    else:
        specs = [_spec_from_request(s) for s in req.specs]
    rows = run_matrix(specs)
    return GridResponse(rows=[_row_out(r) for r in rows], table=emit_table(rows, req.format))


@app.post("/check", response_model=CheckResponse)
def check_endpoint(req: CheckRequest | None = None):
    if req is None:
        req = CheckRequest()
    rows = run_matrix(default_grid())
    report = compare_reference(rows, load_reference_fixture(), iter_tolerance=req.iter_tolerance)
    return CheckResponse(
        passed=report.passed,
        failures=report.failures,
        checked=report.checked,
        lines=list(report.lines),
    )
