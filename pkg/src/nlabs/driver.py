"""Outer iteration: repeated sweeps, stopping tests, optional line search.

The solver keeps a trace of accepted iterates (starting with the start
point itself) and decides after every major iteration whether to stop.
The stopping rules are checked in a fixed order: residual target first,
then a vanishing relative step, then stagnation of the running best
residual, then sustained growth (only watched when the line search is
off), then the iteration cap.  Each rule maps to the flag printed in
the result tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernel import NumericBreakdownError, VARIANTS, VariantSpec, major_iteration
from .linalg import inf_norm

__all__ = [
    "SolveReport",
    "SolverConfig",
    "StopStatus",
    "TraceEntry",
    "check_stopping",
    "full_residual",
    "line_search_halving",
    "solve",
]


class StopStatus(Enum):
    """Why the outer iteration ended; .flag is the table annotation."""

    CONVERGED = ""
    SMALL_STEP = "(x)"
    OSCILLATION = "(o)"
    DIVERGENCE = "(div)"
    MAX_ITER = "(max)"
    NUMERIC_BREAKDOWN = "(err)"

    @property
    def flag(self) -> str:
        return self.value


_PRESETS = {64: (1e-15, 1e-15, 1e-18), 32: (1e-6, 1e-6, 1e-10)}


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and limits for one solve.

    t is the dependence tolerance used inside the sweep, eps the
    residual target, tol the relative step threshold.  The defaults are
    the double-precision settings; for_precision(32) swaps in the
    single-precision ones (t = eps = 1e-6, tol = 1e-10).
    """

    t: float = 1e-15
    eps: float = 1e-15
    tol: float = 1e-18
    n_s: int = 5
    n_div: int = 5
    itmax: int = 100
    n_half: int = 20
    line_search: bool = False
    tol_mode: str = "absolute"
    precision: int = 64

    def __post_init__(self):
        if min(self.t, self.eps, self.tol) <= 0.0:
            raise ValueError("tolerances must be positive")
        if min(self.n_s, self.n_div, self.n_half) < 1:
            raise ValueError("window sizes must be at least 1")
        if self.itmax < 0:
            raise ValueError("itmax must be non-negative")
        if self.tol_mode not in ("absolute", "row_scaled"):
            raise ValueError(f"unknown tol_mode {self.tol_mode!r}")
        if self.precision not in _PRESETS:
            raise ValueError("precision must be 32 or 64")

    @classmethod
    def for_precision(cls, precision: int = 64, **overrides) -> "SolverConfig":
        """Preset for the given precision; None-valued overrides are ignored."""
        if precision not in _PRESETS:
            raise ValueError("precision must be 32 or 64")
        t, eps, tol = _PRESETS[precision]
        fields = dict(t=t, eps=eps, tol=tol, precision=precision)
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**fields)

    @property
    def dtype(self):
        return np.float64 if self.precision == 64 else np.float32


@dataclass(frozen=True)
class TraceEntry:
    """One accepted iterate.  step_inf is None on the entry for x0."""

    iteration: int
    residual_inf: float
    step_inf: float | None
    x_inf: float
    halvings_used: int
    skipped_rows: int


@dataclass(frozen=True)
class SolveReport:
    status: StopStatus
    best_residual: float
    best_iteration: int
    total_iterations: int
    final_x: np.ndarray
    trace: tuple[TraceEntry, ...]
    component_evals: int
    jacobian_element_evals: int


def full_residual(oracle, y) -> np.ndarray:
    """F(y) assembled row by row through the same oracle the sweep uses."""
    y = np.asarray(y)
    dtype = y.dtype if y.dtype.kind == "f" else np.float64
    out = np.zeros(oracle.n, dtype=dtype)
    for k in range(oracle.n):
        out[k] = oracle.component_value(k, y)
    return out


def check_stopping(trace, config: SolverConfig) -> StopStatus | None:
    """First stopping rule the trace satisfies, or None to keep going.

    Order: residual target, small relative step, no improvement of the
    running best within n_s iterations, n_div consecutive residual
    increases (line search off only), iteration cap.
    """
    last = trace[-1]
    if last.residual_inf <= config.eps:
        return StopStatus.CONVERGED
    if last.step_inf is not None:
        previous_norm = trace[-2].x_inf
        bound = config.tol * previous_norm if previous_norm > 0.0 else config.tol
        if last.step_inf <= bound:
            return StopStatus.SMALL_STEP
    residuals = [entry.residual_inf for entry in trace]
    best_index = residuals.index(min(residuals))
    if last.iteration - trace[best_index].iteration >= config.n_s:
        return StopStatus.OSCILLATION
    if not config.line_search and len(residuals) > config.n_div:
        tail = residuals[-(config.n_div + 1) :]
        if all(later > earlier for earlier, later in zip(tail, tail[1:])):
            return StopStatus.DIVERGENCE
    if last.iteration >= config.itmax:
        return StopStatus.MAX_ITER
    return None


def line_search_halving(oracle, x_prev, x_new, f_prev_norm, n_half: int = 20, trial_norm=None):
    """Halve back toward x_prev until the residual drops below f_prev_norm.

    Returns (x_accepted, halvings, evals) where evals counts full
    residual evaluations, the trial point included even when its norm
    was handed in precomputed.  If no point beats f_prev_norm within
    n_half halvings the best point seen is returned, x_new included,
    with halvings = n_half.
    """
    evals = 1
    if trial_norm is None:
        trial_norm = inf_norm(full_residual(oracle, x_new))
    if trial_norm < f_prev_norm:
        return x_new, 0, evals
    best_x, best_norm = x_new, trial_norm
    xbar = x_new
    for halvings in range(1, n_half + 1):
        xbar = 0.5 * (x_prev + xbar)
        evals += 1
        norm = inf_norm(full_residual(oracle, xbar))
        if norm < f_prev_norm:
            return xbar, halvings, evals
        if norm < best_norm:
            best_x, best_norm = xbar, norm
    return best_x, n_half, evals


def solve(oracle, x0, variant: VariantSpec | str = "mod-huang2", config: SolverConfig | None = None) -> SolveReport:
    """Drive major iterations from x0 until a stopping rule fires.

    The trace starts with an entry for x0 itself, so one-sweep
    convergence is visible as total_iterations == 1.  Residual
    monitoring at accepted iterates is not charged to the evaluation
    counters, which track the sweeps and the line search only.
    """
    if config is None:
        config = SolverConfig()
    if isinstance(variant, str):
        variant = VARIANTS[variant]
    x = np.array(x0, dtype=config.dtype)
    component_evals = 0
    jacobian_element_evals = 0
    trace: list[TraceEntry] = []

    def record(iteration, residual, step, halvings, skipped):
        trace.append(
            TraceEntry(iteration, float(residual), step, inf_norm(x), halvings, skipped)
        )

    try:
        residual_norm = inf_norm(full_residual(oracle, x))
        record(0, residual_norm, None, 0, 0)
        if not math.isfinite(residual_norm):
            raise NumericBreakdownError(None, "residual at the start is not finite")
        status = check_stopping(trace, config)
        while status is None:
            outcome = major_iteration(
                oracle, x, variant, t=config.t, tol_mode=config.tol_mode
            )
            component_evals += outcome.component_evals
            jacobian_element_evals += outcome.jacobian_element_evals
            x_new = outcome.x_next
            halvings = 0
            new_norm = inf_norm(full_residual(oracle, x_new))
            if config.line_search and new_norm >= residual_norm:
                x_new, halvings, ls_evals = line_search_halving(
                    oracle, x, x_new, residual_norm,
                    n_half=config.n_half, trial_norm=new_norm,
                )
                component_evals += ls_evals * oracle.n
                new_norm = inf_norm(full_residual(oracle, x_new))
            step = inf_norm(x_new - x)
            x, residual_norm = x_new, new_norm
            record(trace[-1].iteration + 1, residual_norm, step, halvings, len(outcome.skipped_rows))
            if not math.isfinite(residual_norm):
                raise NumericBreakdownError(None, "residual is not finite")
            status = check_stopping(trace, config)
    except NumericBreakdownError:
        status = StopStatus.NUMERIC_BREAKDOWN
    residuals = [entry.residual_inf for entry in trace]
    if residuals:
        best_residual = min(residuals)
        best_iteration = trace[residuals.index(best_residual)].iteration
        total = trace[-1].iteration
    else:
        best_residual, best_iteration, total = math.inf, 0, 0
    return SolveReport(
        status=status,
        best_residual=best_residual,
        best_iteration=best_iteration,
        total_iterations=total,
        final_x=x,
        trace=tuple(trace),
        component_evals=component_evals,
        jacobian_element_evals=jacobian_element_evals,
    )
