"""One sweep of minor iterations: the core update of the solver family.

A major iteration starts from the current outer iterate x, sets y_1 = x
and the projection state to the identity, and visits the n equations
once.  Row k is evaluated at the current minor point y_k, a search
vector p_k is formed from the Jacobian row through the projection
state, y is corrected along p_k so that the linearised k-th equation is
satisfied at y_{k+1}, and the state is updated so later corrections
leave the rows already processed unchanged to first order.  The sweep
returns y_{n+1} as the next outer iterate.

Three search-vector choices are implemented:

* huang           p_k = H_k a_k,        delta = p_k . a_k
* modified huang  p_k = H_k (H_k a_k),  delta = p_k . p_k
* implicit lu     p_k = row j of H_k,   delta = (H_k a_k)_j

with j in the implicit LU case chosen by column pivoting on |H_k a_k|
over the columns not yet used.  The Huang-type variants can hold the
projector either explicitly in packed symmetric storage or implicitly
through the accepted search vectors and pivot scalars; both give the
same iterates, they differ in storage and multiplication counts.

Rows whose pivot scalar fails the dependence test are skipped entirely:
the minor point, the projection state and (for implicit LU) the used
pivot set all stay as they were.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol, runtime_checkable

import numpy as np

from .linalg import PackedSymMatrix, ProjectionFactors, inf_norm, mat_vec

__all__ = [
    "MajorOutcome",
    "Method",
    "MinorRecord",
    "MinorSweep",
    "NumericBreakdownError",
    "Representation",
    "RowOracle",
    "VARIANTS",
    "VariantSpec",
    "dependence_test",
    "major_iteration",
    "select_pivot",
]


class Method(Enum):
    HUANG = "huang"
    MODIFIED_HUANG = "modified-huang"
    IMPLICIT_LU = "implicit-lu"


class Representation(Enum):
    EXPLICIT_H = "explicit"
    FACTORED_PD = "factored"


@dataclass(frozen=True)
class VariantSpec:
    """Search-vector rule plus storage scheme for the projection state."""

    method: Method
    representation: Representation = Representation.EXPLICIT_H

    def __post_init__(self):
        if (
            self.method is Method.IMPLICIT_LU
            and self.representation is not Representation.EXPLICIT_H
        ):
            raise ValueError("implicit LU keeps its projector explicitly")


VARIANTS = {
    "huang1": VariantSpec(Method.HUANG, Representation.EXPLICIT_H),
    "huang2": VariantSpec(Method.HUANG, Representation.FACTORED_PD),
    "mod-huang1": VariantSpec(Method.MODIFIED_HUANG, Representation.EXPLICIT_H),
    "mod-huang2": VariantSpec(Method.MODIFIED_HUANG, Representation.FACTORED_PD),
    "ilu": VariantSpec(Method.IMPLICIT_LU, Representation.EXPLICIT_H),
}


@runtime_checkable
class RowOracle(Protocol):
    """Row-wise access to a square system F(y) = 0 in n unknowns."""

    n: int

    def component_value(self, k: int, y: np.ndarray) -> float: ...

    def jacobian_row(self, k: int, y: np.ndarray) -> np.ndarray: ...


class NumericBreakdownError(ArithmeticError):
    """A non-finite value appeared while processing a row."""

    def __init__(self, row: int | None, message: str):
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(prefix + message)
        self.row = row


def dependence_test(delta, a_norm, t, tol_mode: str = "absolute") -> bool:
    """True when delta is too small for the row to be usable.

    "absolute" compares |delta| against t directly, "row_scaled" against
    t times the max-norm of the Jacobian row.
    """
    if tol_mode == "absolute":
        return abs(delta) <= t
    if tol_mode == "row_scaled":
        return abs(delta) <= t * a_norm
    raise ValueError(f"unknown tol_mode {tol_mode!r}")


def select_pivot(w, used) -> int:
    """Index of the largest |w| entry whose column is still unused.

    Ties resolve to the lowest index.  Rescaling w by any positive
    constant cannot change the selection.
    """
    scores = np.abs(np.asarray(w, dtype=np.float64))
    scores[np.asarray(used, dtype=bool)] = -1.0
    j = int(np.argmax(scores))
    if scores[j] < 0.0:
        raise ValueError("no admissible pivot column remains")
    return j


@dataclass(frozen=True)
class MinorRecord:
    """What one minor step did, for diagnostics and invariant tests."""

    row: int
    skipped: bool
    p: np.ndarray | None = None
    delta: float = 0.0
    beta: float = 0.0


@dataclass(frozen=True)
class MajorOutcome:
    """Result of one full sweep."""

    x_next: np.ndarray
    skipped_rows: tuple[int, ...]
    component_evals: int
    jacobian_element_evals: int


class _Linearization:
    """First-order model of an oracle, frozen at a fixed point.

    component_value(k, y) returns f_k(x0) + a_k(x0) . (y - x0) and the
    rows are constant, so a sweep over this model performs an exact
    linear solve of the Newton system at x0.  All real evaluations
    happen here, once, at construction.
    """

    def __init__(self, oracle: RowOracle, x0: np.ndarray):
        self.n = int(oracle.n)
        self._x0 = np.array(x0, copy=True)
        dtype = self._x0.dtype
        self._f0 = np.zeros(self.n, dtype=dtype)
        self._rows = np.zeros((self.n, self.n), dtype=dtype)
        for k in range(self.n):
            self._f0[k] = oracle.component_value(k, self._x0)
            self._rows[k] = np.asarray(oracle.jacobian_row(k, self._x0), dtype=dtype)
            if not np.isfinite(self._f0[k]) or not np.all(np.isfinite(self._rows[k])):
                raise NumericBreakdownError(k, "frozen evaluation is not finite")

    def component_value(self, k: int, y: np.ndarray):
        return self._f0[k] + self._rows[k] @ (y - self._x0)

    def jacobian_row(self, k: int, y: np.ndarray) -> np.ndarray:
        return self._rows[k]


class MinorSweep:
    """Mutable state of one sweep; step() processes one row.

    The projection state is reachable through apply_h so invariants
    (processed rows in the null space, idempotency of the Huang
    projector) can be observed between steps.
    """

    def __init__(
        self,
        oracle: RowOracle,
        x,
        variant: VariantSpec,
        t: float = 1e-15,
        tol_mode: str = "absolute",
        freeze: bool = False,
    ):
        x = np.asarray(x)
        if x.dtype.kind != "f":
            x = x.astype(np.float64)
        self.n = int(oracle.n)
        if x.shape != (self.n,):
            raise ValueError("start point has the wrong dimension")
        self.variant = variant
        self.t = float(t)
        self.tol_mode = tol_mode
        self.dtype = x.dtype
        self.y = x.copy()
        self.k = 0
        self.skipped: list[int] = []
        self.component_evals = 0
        self.jacobian_element_evals = 0
        if freeze:
            self._oracle = _Linearization(oracle, self.y)
            # construction consumed the only real evaluations
            self.component_evals = self.n
            self.jacobian_element_evals = self.n * self.n
        else:
            self._oracle = oracle
        self._count_calls = not freeze
        self.h: PackedSymMatrix | np.ndarray | None = None
        self.factors: ProjectionFactors | None = None
        self.used: np.ndarray | None = None
        if variant.representation is Representation.FACTORED_PD:
            self.factors = ProjectionFactors(self.n, self.dtype)
        elif variant.method is Method.IMPLICIT_LU:
            self.h = np.eye(self.n, dtype=self.dtype)
            self.used = np.zeros(self.n, dtype=bool)
        else:
            self.h = PackedSymMatrix.identity(self.n, self.dtype)

    def apply_h(self, v) -> np.ndarray:
        """Current projector applied to v, whatever the storage form."""
        if self.variant.representation is Representation.FACTORED_PD:
            return self.factors.project(np.asarray(v, dtype=self.dtype))
        return mat_vec(self.h, v)

    def form_search_vector(self, a_k):
        """(p, delta) for the current row; pure, no state change."""
        a_k = np.asarray(a_k, dtype=self.dtype)
        p, delta, _ = self._search_direction(a_k)
        return p, delta

    def _search_direction(self, a_k):
        """(p, delta, aux); aux carries what the state update will reuse."""
        method = self.variant.method
        if self.variant.representation is Representation.FACTORED_PD:
            if method is Method.HUANG:
                p = self.factors.project(a_k)
                return p, p @ a_k, None
            s = self.factors.project(a_k)
            p = self.factors.project(s)
            return p, p @ p, None
        if method is Method.HUANG:
            w = self.h.matvec(a_k)
            return w, w @ a_k, w
        if method is Method.MODIFIED_HUANG:
            z = self.h.matvec(a_k)
            p = self.h.matvec(z)
            return p, p @ p, z
        w = self.h @ a_k
        j = select_pivot(w, self.used)
        return self.h[j].copy(), w[j], (w, j)

    def _update_state(self, p, delta, aux) -> None:
        if self.variant.representation is Representation.FACTORED_PD:
            self.factors.append(p, delta)
            return
        if self.variant.method is Method.IMPLICIT_LU:
            w, j = aux
            self.h -= np.outer(w, p / delta)
            self.used[j] = True
            return
        # aux is H a_k for both Huang forms; reusing it keeps the update
        # at one rank-one sweep over the stored triangle
        self.h.subtract_outer_lower(aux, p, delta)

    def step(self) -> MinorRecord:
        """Process one row and advance; returns what happened."""
        if self.k >= self.n:
            raise RuntimeError("sweep already finished")
        k = self.k
        with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
            f_k = self._oracle.component_value(k, self.y)
            a_k = np.asarray(self._oracle.jacobian_row(k, self.y), dtype=self.dtype)
            if self._count_calls:
                self.component_evals += 1
                self.jacobian_element_evals += self.n
            if not np.isfinite(f_k):
                raise NumericBreakdownError(k, "component value is not finite")
            if a_k.shape != (self.n,):
                raise ValueError(f"jacobian row {k} has the wrong length")
            if not np.all(np.isfinite(a_k)):
                raise NumericBreakdownError(k, "jacobian row is not finite")
            p, delta, aux = self._search_direction(a_k)
            if not np.isfinite(delta):
                raise NumericBreakdownError(k, "pivot scalar is not finite")
            if dependence_test(delta, inf_norm(a_k), self.t, self.tol_mode):
                self.skipped.append(k)
                self.k += 1
                return MinorRecord(k, skipped=True)
            beta = f_k / delta
            self.y = self.y - beta * p
            if not np.all(np.isfinite(self.y)):
                raise NumericBreakdownError(k, "minor iterate is not finite")
            self._update_state(p, delta, aux)
        self.k += 1
        return MinorRecord(k, skipped=False, p=p, delta=float(delta), beta=float(beta))

    def outcome(self) -> MajorOutcome:
        if self.k < self.n:
            raise RuntimeError("sweep is not finished")
        return MajorOutcome(
            self.y.copy(),
            tuple(self.skipped),
            self.component_evals,
            self.jacobian_element_evals,
        )


def major_iteration(
    oracle: RowOracle,
    x,
    variant: VariantSpec,
    t: float = 1e-15,
    tol_mode: str = "absolute",
    freeze: bool = False,
) -> MajorOutcome:
    """Run one full sweep from x and return the next outer iterate.

    With freeze=True every row is taken from the first-order model at x,
    which turns the sweep into an exact solve of the Newton system
    J(x) d = -F(x); used to validate the kernel against a direct
    elimination.
    """
    sweep = MinorSweep(oracle, x, variant, t=t, tol_mode=tol_mode, freeze=freeze)
    while sweep.k < sweep.n:
        sweep.step()
    return sweep.outcome()
