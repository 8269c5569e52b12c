"""Request and response bodies for the HTTP surface."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

MethodName = Literal["huang1", "mod-huang1", "huang2", "mod-huang2", "ilu"]
TableFormat = Literal["markdown", "csv"]


class SolverOptions(BaseModel):
    """Solver knobs; unset fields fall back to the precision preset."""

    model_config = ConfigDict(extra="forbid")

    precision: Literal[32, 64] = 64
    t: float | None = None
    eps: float | None = None
    tol: float | None = None
    n_s: int | None = None
    n_div: int | None = None
    itmax: int | None = None
    n_half: int | None = None
    tol_mode: Literal["absolute", "row_scaled"] | None = None

    def overrides(self) -> tuple:
        pairs = []
        for name in ("t", "eps", "tol", "n_s", "n_div", "itmax", "n_half", "tol_mode"):
            value = getattr(self, name)
            if value is not None:
                pairs.append((name, value))
        return tuple(pairs)


class SolveRequest(BaseModel):
    problem: str
    n: int | None = None
    scale: float = 1.0
    method: MethodName = "mod-huang2"
    line_search: bool = False
    options: SolverOptions = Field(default_factory=SolverOptions)
    include_trace: bool = False


class TraceEntryOut(BaseModel):
    iteration: int
    residual_inf: float
    step_inf: float | None
    x_inf: float
    halvings_used: int
    skipped_rows: int


class ReportOut(BaseModel):
    status: str  # table flag; "" means converged
    best_residual: float
    best_iteration: int
    total_iterations: int
    final_x: list[float]
    component_evals: int
    jacobian_element_evals: int
    trace: list[TraceEntryOut] | None = None


class RowOut(BaseModel):
    function: str
    n: int
    scale: float
    method: str
    line_search: Literal["on", "off"]
    best_residual: float
    best_iteration: int
    total_iterations: int
    status: str
    time_seconds: float


class SolveResponse(BaseModel):
    row: RowOut
    report: ReportOut


class GridRequest(BaseModel):
    """A whole benchmark run; specs=None means the default matrix."""

    specs: list[SolveRequest] | None = None
    format: TableFormat = "markdown"
    precision: Literal[32, 64] = 64
    options: SolverOptions | None = None


class GridResponse(BaseModel):
    rows: list[RowOut]
    table: str


class CheckRequest(BaseModel):
    iter_tolerance: int = 3


class CheckResponse(BaseModel):
    passed: bool
    failures: int
    checked: int
    lines: list[str]


class ProblemInfo(BaseModel):
    name: str
    default_n: int
    admissible: str
    standard_start: list[float]
