"""Exact linear algebra over prime fields GF(p).

Matrices are dense ``int64`` numpy arrays with entries in ``[0, p)``.  Every
routine is deterministic: pivots are chosen leftmost-first and candidate
columns are scanned left to right, so the same input always yields the same
basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import Inconsistent, NotNested

MAX_MODULUS = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field of integers modulo a prime ``p`` (``2 <= p < 2**16``)."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or not 2 <= self.p < MAX_MODULUS:
            raise ValueError(f"field modulus must be an integer in [2, 2**16), got {self.p!r}")
        if not is_prime(int(self.p)):
            raise ValueError(f"field modulus {self.p} is not prime")
        object.__setattr__(self, "p", int(self.p))

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, -1, self.p)

    def __repr__(self):
        return f"GF({self.p})"


def _as_field(p) -> PrimeField:
    return p if isinstance(p, PrimeField) else PrimeField(int(p))


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    """An immutable matrix over GF(p).

    ``data`` is stored as a read-only ``int64`` array of shape ``(rows, cols)``
    reduced modulo ``p``.  Arithmetic operators return new matrices.
    """

    field: PrimeField
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        fld = _as_field(self.field)
        arr = np.array(self.data, dtype=np.int64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        arr %= fld.p
        arr.setflags(write=False)
        object.__setattr__(self, "field", fld)
        object.__setattr__(self, "data", arr)

    # construction ---------------------------------------------------------

    @classmethod
    def zeros(cls, p, rows: int, cols: int) -> "FieldMatrix":
        return cls(_as_field(p), np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p, n: int) -> "FieldMatrix":
        return cls(_as_field(p), np.eye(n, dtype=np.int64))

    @classmethod
    def from_columns(cls, p, columns: Sequence[Sequence[int]], rows: int | None = None) -> "FieldMatrix":
        """Build an ``rows x len(columns)`` matrix whose j-th column is ``columns[j]``."""
        cols = [list(c) for c in columns]
        if not cols:
            if rows is None:
                raise ValueError("rows must be given for a matrix with no columns")
            return cls.zeros(p, rows, 0)
        m = len(cols[0]) if rows is None else rows
        if any(len(c) != m for c in cols):
            raise ValueError("all columns must have the same length")
        return cls(_as_field(p), np.array(cols, dtype=np.int64).reshape(len(cols), m).T)

    # basic properties -----------------------------------------------------

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def T(self) -> "FieldMatrix":
        return FieldMatrix(self.field, self.data.T)

    def column(self, j: int) -> "FieldMatrix":
        return FieldMatrix(self.field, self.data[:, j : j + 1])

    def columns(self) -> list[list[int]]:
        """Column-major nested list of Python ints."""
        return [[int(v) for v in self.data[:, j]] for j in range(self.cols)]

    def select_columns(self, idx: Iterable[int]) -> "FieldMatrix":
        idx = list(idx)
        return FieldMatrix(self.field, self.data[:, idx].reshape(self.rows, len(idx)))

    def hstack(self, *others: "FieldMatrix") -> "FieldMatrix":
        return hstack(self, *others)

    # arithmetic -----------------------------------------------------------

    def _check(self, other: "FieldMatrix"):
        if other.field != self.field:
            raise ValueError(f"field mismatch: {self.field} vs {other.field}")

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        # entries < 2**16, so each product < 2**32; reduce per term to stay in int64
        out = np.zeros((self.rows, other.cols), dtype=np.int64)
        for k in range(self.cols):
            out = (out + np.outer(self.data[:, k], other.data[k, :])) % self.p
        return FieldMatrix(self.field, out)

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check(other)
        return FieldMatrix(self.field, self.data + other.data)

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check(other)
        return FieldMatrix(self.field, self.data - other.data)

    def __neg__(self) -> "FieldMatrix":
        return FieldMatrix(self.field, -self.data)

    def scale(self, c: int) -> "FieldMatrix":
        return FieldMatrix(self.field, self.data * (c % self.p))

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(
            np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.p, self.shape, self.data.tobytes()))

    def is_zero(self) -> bool:
        return not self.data.any()

    def __repr__(self):
        return f"FieldMatrix({self.field}, {self.data.tolist()})"


def hstack(first: FieldMatrix, *rest: FieldMatrix) -> FieldMatrix:
    for r in rest:
        first._check(r)
        if r.rows != first.rows:
            raise ValueError(f"row mismatch: {first.rows} vs {r.rows}")
    return FieldMatrix(first.field, np.hstack([first.data] + [r.data for r in rest]))


def vstack(first: FieldMatrix, *rest: FieldMatrix) -> FieldMatrix:
    for r in rest:
        first._check(r)
        if r.cols != first.cols:
            raise ValueError(f"column mismatch: {first.cols} vs {r.cols}")
    return FieldMatrix(first.field, np.vstack([first.data] + [r.data for r in rest]))


def rref(M: FieldMatrix, pivot_limit: int | None = None) -> tuple[FieldMatrix, list[int], int]:
    """Reduced row echelon form with leftmost pivots.

    Args:
        M: input matrix.
        pivot_limit: only columns ``< pivot_limit`` may hold pivots; row
            operations still act on the full width (used for augmented
            systems).

    Returns:
        ``(R, pivot_cols, rank)``.
    """
    p = M.p
    R = M.data.copy()
    rows, cols = R.shape
    limit = cols if pivot_limit is None else pivot_limit
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = (R[r] * pow(int(R[r, c]), -1, p)) % p
        others = np.nonzero(R[:, c])[0]
        for i in others:
            if i != r:
                R[i] = (R[i] - R[i, c] * R[r]) % p
        pivots.append(c)
        r += 1
    return FieldMatrix(M.field, R), pivots, len(pivots)


def rank(M: FieldMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return rref(M)[2]


def in_span(v: FieldMatrix, A: FieldMatrix) -> bool:
    """True iff every column of ``v`` lies in the column space of ``A``."""
    return rank(hstack(A, v)) == rank(A)


def solve(A: FieldMatrix, B: FieldMatrix) -> FieldMatrix:
    """Return one ``X`` with ``A @ X == B``; free variables are set to zero.

    Raises:
        Inconsistent: if some column of ``B`` is outside the span of ``A``.
    """
    if A.rows != B.rows:
        raise ValueError(f"row mismatch: {A.shape} vs {B.shape}")
    n = A.cols
    R, pivots, r = rref(hstack(A, B), pivot_limit=n)
    if r < R.rows and R.data[r:, n:].any():
        raise Inconsistent("right-hand side is not in the column space")
    X = np.zeros((n, B.cols), dtype=np.int64)
    for i, c in enumerate(pivots):
        X[c] = R.data[i, n:]
    return FieldMatrix(A.field, X)


def inverse(A: FieldMatrix) -> FieldMatrix:
    if A.rows != A.cols:
        raise ValueError(f"cannot invert a non-square {A.shape} matrix")
    if rank(A) != A.rows:
        raise ZeroDivisionError("matrix is singular")
    return solve(A, FieldMatrix.identity(A.field, A.rows))


def column_basis(A: FieldMatrix) -> FieldMatrix:
    """Independent subset of A's columns (leftmost first) spanning span(A)."""
    if A.cols == 0:
        return A
    _, pivots, _ = rref(A)
    return A.select_columns(pivots)


def intersect_column_spaces(A: FieldMatrix, B: FieldMatrix) -> FieldMatrix:
    """Basis (as columns) of span(A) ∩ span(B), via the Zassenhaus block matrix.

    Rows of ``[[A^T, A^T], [B^T, 0]]`` are row-reduced; rows whose left half
    vanishes carry a basis of the intersection in their right half.
    """
    if A.rows != B.rows:
        raise ValueError(f"row mismatch: {A.shape} vs {B.shape}")
    m = A.rows
    if A.cols == 0 or B.cols == 0:
        return FieldMatrix.zeros(A.field, m, 0)
    top = np.hstack([A.data.T, A.data.T])
    bottom = np.hstack([B.data.T, np.zeros((B.cols, m), dtype=np.int64)])
    R, pivots, _ = rref(FieldMatrix(A.field, np.vstack([top, bottom])))
    cols = [R.data[i, m:] for i, c in enumerate(pivots) if c >= m]
    if not cols:
        return FieldMatrix.zeros(A.field, m, 0)
    return FieldMatrix(A.field, np.array(cols, dtype=np.int64).T)


def extend_basis(inner: FieldMatrix, outer: FieldMatrix) -> FieldMatrix:
    """Columns of ``outer`` that extend ``inner`` to a basis of span(outer).

    ``outer``'s columns are scanned left to right and kept whenever they raise
    the rank.

    Raises:
        NotNested: if ``inner`` has dependent columns or leaves span(outer).
    """
    if inner.rows != outer.rows:
        raise ValueError(f"row mismatch: {inner.shape} vs {outer.shape}")
    r_in = rank(inner)
    if r_in != inner.cols:
        raise NotNested("inner columns are linearly dependent")
    if inner.cols and not in_span(inner, outer):
        raise NotNested("span(inner) is not contained in span(outer)")
    current = inner
    r = r_in
    kept: list[int] = []
    for j in range(outer.cols):
        candidate = hstack(current, outer.column(j))
        rc = rank(candidate)
        if rc > r:
            kept.append(j)
            current, r = candidate, rc
    return outer.select_columns(kept)


def nullspace(A: FieldMatrix) -> FieldMatrix:
    """Basis (as columns) of {x : A x = 0}."""
    n = A.cols
    R, pivots, _ = rref(A)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, c in enumerate(pivots):
            basis[c, k] = -R.data[i, f]
    return FieldMatrix(A.field, basis)


def random_matrix(p: int, rows: int, cols: int, rng: np.random.Generator) -> FieldMatrix:
    return FieldMatrix(PrimeField(p), rng.integers(0, p, size=(rows, cols)))
