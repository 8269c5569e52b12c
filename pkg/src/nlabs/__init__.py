"""Row-projection solvers for dense nonlinear systems.

A major iteration sweeps the equations once, re-evaluating each row at
the newest minor iterate, so structurally triangular systems can
converge in a single outer iteration.  Three classical search-vector
choices are provided (Huang, modified Huang, implicit LU with column
pivoting) over explicit packed-symmetric or factored storage of the
projector, together with a benchmark harness that reproduces the
published iteration tables for the standard test problems.
"""

__version__ = "0.1.0"

from .bench import (
    CheckReport,
    ExperimentSpec,
    FixtureRow,
    METHOD_LABELS,
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
from .driver import (
    SolveReport,
    SolverConfig,
    StopStatus,
    TraceEntry,
    check_stopping,
    full_residual,
    line_search_halving,
    solve,
)
from .kernel import (
    MajorOutcome,
    Method,
    MinorRecord,
    MinorSweep,
    NumericBreakdownError,
    Representation,
    RowOracle,
    VARIANTS,
    VariantSpec,
    dependence_test,
    major_iteration,
    select_pivot,
)
from .linalg import (
    DegenerateDeltaError,
    PackedSymMatrix,
    ProjectionFactors,
    inf_norm,
    mat_vec,
    projection_update,
    vec_outer_apply,
)
from .problems import (
    ADMISSIBLE,
    PROBLEMS,
    ProblemDef,
    fd_jacobian_row,
    make_brown_almost_linear,
    make_linear_system,
    make_powell_singular,
    make_problem,
    make_rosenbrock,
    make_schubert_broyden,
    scale_start,
)

__all__ = [
    "ADMISSIBLE",
    "CheckReport",
    "DegenerateDeltaError",
    "ExperimentSpec",
    "FixtureRow",
    "METHOD_LABELS",
    "MajorOutcome",
    "Method",
    "MinorRecord",
    "MinorSweep",
    "NumericBreakdownError",
    "PROBLEMS",
    "PackedSymMatrix",
    "ProblemDef",
    "ProjectionFactors",
    "ReferenceFixture",
    "Representation",
    "ResultRow",
    "RowOracle",
    "SolveReport",
    "SolverConfig",
    "StopStatus",
    "TraceEntry",
    "VARIANTS",
    "VariantSpec",
    "check_stopping",
    "compare_reference",
    "default_grid",
    "dependence_test",
    "emit_table",
    "fd_jacobian_row",
    "full_residual",
    "inf_norm",
    "line_search_halving",
    "load_reference_fixture",
    "major_iteration",
    "make_brown_almost_linear",
    "make_linear_system",
    "make_powell_singular",
    "make_problem",
    "make_rosenbrock",
    "make_schubert_broyden",
    "mat_vec",
    "newton_reference_solve",
    "parse_csv",
    "parse_reference_fixture",
    "projection_update",
    "run_experiment",
    "run_matrix",
    "scale_start",
    "select_pivot",
    "solve",
    "vec_outer_apply",
    "__version__",
]
