"""Dense linear algebra for the row-projection solvers.

Vectors and full matrices are plain numpy arrays in whatever floating
dtype the caller works in (float64 normally, float32 for the
single-precision mode).  Symmetric projection matrices are kept in
packed lower-triangular storage, n*(n+1)/2 scalars instead of n*n, and
symmetry holds by construction: updates only ever write the lower
triangle, and reads of (i, j) and (j, i) hit the same storage cell.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DegenerateDeltaError",
    "PackedSymMatrix",
    "ProjectionFactors",
    "inf_norm",
    "mat_vec",
    "projection_update",
    "vec_outer_apply",
]


class DegenerateDeltaError(ZeroDivisionError):
    """A projection update was attempted with |delta| at or below the
    underflow threshold of the active precision."""


def _check_delta(delta) -> None:
    d = np.asarray(delta)
    tiny = np.finfo(d.dtype if d.dtype.kind == "f" else np.float64).tiny
    if not np.isfinite(d) or abs(float(d)) < tiny:
        raise DegenerateDeltaError(f"degenerate pivot scalar {float(d):g}")


def inf_norm(v) -> float:
    """Largest absolute entry of a vector."""
    v = np.asarray(v)
    if v.size == 0:
        raise ValueError("inf_norm is undefined for an empty vector")
    return float(np.max(np.abs(v)))


class PackedSymMatrix:
    """Symmetric matrix stored as its lower triangle in a flat array.

    Entry (i, j) with i >= j lives at offset i*(i+1)/2 + j.  Reading the
    mirror entry (j, i) returns the identical stored scalar, so symmetry
    cannot drift no matter what gets written.
    """

    __slots__ = ("n", "data")

    def __init__(self, n: int, dtype=np.float64):
        if n < 1:
            raise ValueError("dimension must be at least 1")
        self.n = int(n)
        self.data = np.zeros(self.n * (self.n + 1) // 2, dtype=dtype)

    @classmethod
    def identity(cls, n: int, dtype=np.float64) -> "PackedSymMatrix":
        h = cls(n, dtype)
        idx = np.arange(n)
        h.data[idx * (idx + 1) // 2 + idx] = 1.0
        return h

    def read(self, i: int, j: int):
        if i < j:
            i, j = j, i
        return self.data[i * (i + 1) // 2 + j]

    def row_lower(self, i: int) -> np.ndarray:
        """View of row i up to and including the diagonal."""
        base = i * (i + 1) // 2
        return self.data[base : base + i + 1]

    def matvec(self, v) -> np.ndarray:
        """H @ v using only the stored triangle."""
        v = np.asarray(v)
        out = np.zeros(self.n, dtype=self.data.dtype)
        for i in range(self.n):
            row = self.row_lower(i)
            out[i] += row @ v[: i + 1]
            out[:i] += row[:i] * v[i]
        return out

    def subtract_outer_lower(self, w, p, delta) -> None:
        """In place H <- H - w p^T / delta on the lower triangle.

        The caller guarantees w p^T is symmetric (w and p parallel under
        H, as in the Huang-type updates); the upper triangle is simply
        never formed.
        """
        _check_delta(delta)
        scale = np.asarray(w) / delta
        p = np.asarray(p)
        for i in range(self.n):
            self.row_lower(i)[:] -= scale[i] * p[: i + 1]

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.n, self.n), dtype=self.data.dtype)
        for i in range(self.n):
            h[i, : i + 1] = self.row_lower(i)
        iu = np.triu_indices(self.n, 1)
        h[iu] = h.T[iu]
        return h


def mat_vec(m, v) -> np.ndarray:
    """Matrix times vector for either storage form."""
    if isinstance(m, PackedSymMatrix):
        return m.matvec(v)
    return np.asarray(m) @ np.asarray(v)


def projection_update(h, u, p, delta):
    """Apply H <- H - (H u) p^T / delta in place and return H.

    The rank-one correction that puts u into the null space of H while
    keeping whatever H already annihilates.  For the packed symmetric
    form only the lower triangle is touched.
    """
    _check_delta(delta)
    w = mat_vec(h, u)
    if isinstance(h, PackedSymMatrix):
        h.subtract_outer_lower(w, p, delta)
    else:
        h -= np.outer(w, np.asarray(p) / delta)
    return h


def vec_outer_apply(p_cols, deltas, v) -> np.ndarray:
    """P diag(deltas)^-1 P^T v, evaluated right to left.

    p_cols is n-by-m with m >= 0; the n-by-n product matrix is never
    formed, so the cost stays O(n m).
    """
    p_cols = np.asarray(p_cols)
    v = np.asarray(v)
    if p_cols.ndim != 2 or p_cols.shape[0] != v.shape[0]:
        raise ValueError("column block and vector shapes do not agree")
    m = p_cols.shape[1]
    if m == 0:
        return np.zeros_like(v)
    deltas = np.asarray(deltas)
    if deltas.shape != (m,):
        raise ValueError("need exactly one pivot scalar per stored column")
    tiny = np.finfo(deltas.dtype if deltas.dtype.kind == "f" else np.float64).tiny
    if not np.all(np.isfinite(deltas)) or np.any(np.abs(deltas) < tiny):
        raise DegenerateDeltaError("degenerate pivot scalar in factored projector")
    return p_cols @ ((p_cols.T @ v) / deltas)


class ProjectionFactors:
    """Accepted search vectors and their pivot scalars, column by column.

    The column buffer is allocated once at full n-by-n size; append
    fills the next column.  apply(v) evaluates P D^-1 P^T v over the
    filled part, project(v) returns v minus that, i.e. the action of the
    implicitly held projector.
    """

    __slots__ = ("n", "count", "_cols", "_deltas")

    def __init__(self, n: int, dtype=np.float64):
        self.n = int(n)
        self.count = 0
        self._cols = np.zeros((self.n, self.n), dtype=dtype, order="F")
        self._deltas = np.zeros(self.n, dtype=dtype)

    @property
    def columns(self) -> np.ndarray:
        return self._cols[:, : self.count]

    @property
    def deltas(self) -> np.ndarray:
        return self._deltas[: self.count]

    def append(self, p, delta) -> None:
        _check_delta(delta)
        if self.count >= self.n:
            raise ValueError("factor storage is already full")
        self._cols[:, self.count] = p
        self._deltas[self.count] = delta
        self.count += 1

    def apply(self, v) -> np.ndarray:
        return vec_outer_apply(self.columns, self.deltas, np.asarray(v))

    def project(self, v) -> np.ndarray:
        if self.count == 0:
            return np.array(v, copy=True)
        return v - self.apply(v)
