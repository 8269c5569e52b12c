"""Benchmark systems with row-wise component and Jacobian access.

Every function evaluates in the floating dtype of the query point, so a
float32 solve runs genuinely in single precision.  Row indices are
0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ADMISSIBLE",
    "PROBLEMS",
    "ProblemDef",
    "fd_jacobian_row",
    "make_brown_almost_linear",
    "make_linear_system",
    "make_powell_singular",
    "make_problem",
    "make_rosenbrock",
    "make_schubert_broyden",
    "scale_start",
]


def _float_dtype(y) -> np.dtype:
    dt = np.asarray(y).dtype
    return dt if dt.kind == "f" else np.dtype(np.float64)


@dataclass(frozen=True)
class ProblemDef:
    """A square system in row-wise form."""

    name: str
    n: int
    standard_start: np.ndarray
    known_root: np.ndarray | None
    _component: Callable
    _row: Callable

    def component_value(self, k: int, y):
        """Value of equation k at y."""
        return self._component(k, np.asarray(y))

    def jacobian_row(self, k: int, y) -> np.ndarray:
        """Row k of the Jacobian at y, dense, in the dtype of y."""
        return self._row(k, np.asarray(y))


def make_rosenbrock(n: int = 2) -> ProblemDef:
    """Chained pairs: odd-indexed rows are linear in the even variable,
    even-indexed rows couple a pair through a square."""
    if n < 2 or n % 2:
        raise ValueError("rosenbrock needs an even dimension n >= 2")

    def component(k, y):
        if k % 2 == 0:
            return 1.0 - y[k]
        return 10.0 * (y[k] - y[k - 1] ** 2)

    def row(k, y):
        out = np.zeros(n, dtype=_float_dtype(y))
        if k % 2 == 0:
            out[k] = -1.0
        else:
            out[k - 1] = -20.0 * y[k - 1]
            out[k] = 10.0
        return out

    start = np.tile(np.array([-1.2, 1.0]), n // 2)
    name = "Rosenbrock" if n == 2 else "Extended Rosenbrock"
    return ProblemDef(name, n, start, np.ones(n), component, row)


def make_powell_singular() -> ProblemDef:
    """Four equations whose Jacobian is singular at the root (the origin)."""
    n = 4
    root5 = math.sqrt(5.0)
    root10 = math.sqrt(10.0)

    def component(k, y):
        if k == 0:
            return y[0] + 10.0 * y[1]
        if k == 1:
            return root5 * (y[2] - y[3])
        if k == 2:
            return (y[1] - 2.0 * y[2]) ** 2
        return root10 * (y[0] - y[3]) ** 2

    def row(k, y):
        out = np.zeros(n, dtype=_float_dtype(y))
        if k == 0:
            out[0] = 1.0
            out[1] = 10.0
        elif k == 1:
            out[2] = root5
            out[3] = -root5
        elif k == 2:
            d = 2.0 * (y[1] - 2.0 * y[2])
            out[1] = d
            out[2] = -2.0 * d
        else:
            d = 2.0 * root10 * (y[0] - y[3])
            out[0] = d
            out[3] = -d
        return out

    start = np.array([3.0, -1.0, 0.0, 1.0])
    return ProblemDef("Powell singular", n, start, np.zeros(n), component, row)


def make_brown_almost_linear(n: int = 4) -> ProblemDef:
    """n-1 rows linear in the sum of all variables plus one product row."""
    if n < 2:
        raise ValueError("brown-almost-linear needs n >= 2")

    def component(k, y):
        if k < n - 1:
            return y[k] + np.sum(y) - (n + 1.0)
        return np.prod(y) - 1.0

    def row(k, y):
        dt = _float_dtype(y)
        if k < n - 1:
            out = np.ones(n, dtype=dt)
            out[k] = 2.0
            return out
        y = np.asarray(y, dtype=dt)
        # leave-one-out products from prefix/suffix scans; stays exact
        # when some y_l is zero, where a division trick would not
        pre = np.ones(n + 1, dtype=dt)
        pre[1:] = np.cumprod(y)
        suf = np.ones(n + 1, dtype=dt)
        suf[:n] = np.cumprod(y[::-1])[::-1]
        return pre[:n] * suf[1:]

    return ProblemDef(
        "Brown almost linear", n, np.full(n, 0.5), np.ones(n), component, row
    )


def make_schubert_broyden(n: int = 10) -> ProblemDef:
    """Tridiagonal quadratic system; rows come back dense all the same."""
    if n < 3:
        raise ValueError("schubert-broyden needs n >= 3")

    def component(k, y):
        v = (3.0 - y[k]) * y[k] + 1.0
        if k > 0:
            v = v - y[k - 1]
        if k < n - 1:
            v = v - 2.0 * y[k + 1]
        return v

    def row(k, y):
        out = np.zeros(n, dtype=_float_dtype(y))
        out[k] = 3.0 - 2.0 * y[k]
        if k > 0:
            out[k - 1] = -1.0
        if k < n - 1:
            out[k + 1] = -2.0
        return out

    return ProblemDef("Schubert Broyden", n, np.full(n, -1.0), None, component, row)


def make_linear_system(a, b, name: str = "linear system") -> ProblemDef:
    """F(y) = A y - b with constant rows; used to validate the kernels."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = int(b.shape[0])
    if a.shape != (n, n):
        raise ValueError("matrix and right-hand side do not agree")

    def component(k, y):
        dt = _float_dtype(y)
        return a[k].astype(dt) @ y - dt.type(b[k])

    def row(k, y):
        return a[k].astype(_float_dtype(y), copy=True)

    return ProblemDef(name, n, np.zeros(n), None, component, row)


def scale_start(problem: ProblemDef, factor: float) -> np.ndarray:
    """The problem's standard start scaled elementwise by factor > 0."""
    factor = float(factor)
    if factor <= 0.0:
        raise ValueError("scale factor must be positive")
    return factor * problem.standard_start


def fd_jacobian_row(problem: ProblemDef, k: int, y, h: float = 1e-6) -> np.ndarray:
    """Central-difference approximation of Jacobian row k at y."""
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros(problem.n)
    for l in range(problem.n):
        forward = y.copy()
        forward[l] += h
        backward = y.copy()
        backward[l] -= h
        out[l] = (
            problem.component_value(k, forward) - problem.component_value(k, backward)
        ) / (2.0 * h)
    return out


PROBLEMS = {
    "rosenbrock": (make_rosenbrock, 2),
    "powell-singular": (make_powell_singular, 4),
    "brown-almost-linear": (make_brown_almost_linear, 4),
    "schubert-broyden": (make_schubert_broyden, 10),
}

ADMISSIBLE = {
    "rosenbrock": "even n >= 2",
    "powell-singular": "n = 4",
    "brown-almost-linear": "n >= 2",
    "schubert-broyden": "n >= 3",
}


def make_problem(name: str, n: int | None = None) -> ProblemDef:
    """Build a registered problem by slug, at its default size if n is None."""
    try:
        factory, default_n = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; known: {sorted(PROBLEMS)}") from None
    if name == "powell-singular":
        if n not in (None, 4):
            raise ValueError("powell-singular is fixed at n = 4")
        return factory()
    return factory(default_n if n is None else n)
