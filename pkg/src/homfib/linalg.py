"""Exact integer linear algebra.

Everything here works on Python ints (arbitrary precision) and
``fractions.Fraction``; there is no floating point path.  Matrices are
small (the largest assembled determinant problems are around 12x12) but
their entries can be as large as ``2**(k+1)`` for a user supplied ``k``,
so fixed-width arithmetic is never used.

Conventions
-----------
``cokernel(A)`` treats the *rows* of ``A`` as relations among generators
indexed by the *columns*, i.e. it returns ``Z^cols / rowspace(A)``.  This
matches how surgery presentations are read (row ``i`` of Phi is the
relation contributed by the ``i``-th surgery slope).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class DimensionError(ValueError):
    """Raised when matrix shapes are incompatible."""


class SingularMatrixError(ValueError):
    """Raised when an inverse is requested for a singular matrix."""


@dataclass(frozen=True)
class IntMatrix:
    """Immutable dense integer matrix stored row-major.

    ``IntMatrix`` keeps its column count explicitly so that ``r x 0`` and
    ``0 x c`` shapes survive round trips.  The ``0 x 0`` matrix is the
    identity for :func:`direct_sum`.
    """

    nrows: int
    ncols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.nrows < 0 or self.ncols < 0:
            raise DimensionError("negative dimension")
        if len(self.entries) != self.nrows * self.ncols:
            raise DimensionError(
                f"{len(self.entries)} entries for a {self.nrows}x{self.ncols} matrix"
            )
        for e in self.entries:
            if not isinstance(e, int) or isinstance(e, bool):
                raise TypeError(f"matrix entries must be int, got {type(e).__name__}")

    # construction -----------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], ncols: int | None = None) -> "IntMatrix":
        rows = [tuple(int(x) for x in r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise DimensionError("ragged rows")
        return cls(len(rows), ncols, tuple(x for r in rows for x in r))

    @classmethod
    def zeros(cls, nrows: int, ncols: int | None = None) -> "IntMatrix":
        ncols = nrows if ncols is None else ncols
        return cls(nrows, ncols, (0,) * (nrows * ncols))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(n, n, tuple(int(values[i]) if i == j else 0 for i in range(n) for j in range(n)))

    # access -----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(ij)
        return self.entries[i * self.ncols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.ncols:(i + 1) * self.ncols]

    def col(self, j: int) -> tuple[int, ...]:
        return self.entries[j::self.ncols] if self.ncols else ()

    def rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.nrows)]

    tolist = rows

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix.from_rows(
            [[self[i, j] for i in range(self.nrows)] for j in range(self.ncols)],
            ncols=self.nrows,
        )

    def is_symmetric(self) -> bool:
        return self.is_square and all(
            self[i, j] == self[j, i] for i in range(self.nrows) for j in range(i)
        )

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "IntMatrix":
        return IntMatrix.from_rows([[self[i, j] for j in cols] for i in rows], ncols=len(cols))

    # arithmetic -------------------------------------------------------
    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = [other.col(j) for j in range(other.ncols)]
        return IntMatrix.from_rows(
            [[sum(a * b for a, b in zip(self.row(i), c)) for c in cols] for i in range(self.nrows)],
            ncols=other.ncols,
        )

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return IntMatrix(self.nrows, self.ncols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.nrows, self.ncols, tuple(-a for a in self.entries))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(self.nrows, self.ncols, tuple(c * a for a in self.entries))

    def mod(self, q: int) -> "IntMatrix":
        return IntMatrix(self.nrows, self.ncols, tuple(a % q for a in self.entries))

    def __repr__(self):
        return f"IntMatrix({self.rows()!r})"


def as_matrix(m) -> IntMatrix:
    """Coerce nested sequences (or an IntMatrix) to ``IntMatrix``."""
    if isinstance(m, IntMatrix):
        return m
    rows = [list(r) for r in m]
    return IntMatrix.from_rows(rows)


def direct_sum(*blocks: IntMatrix) -> IntMatrix:
    """Block-diagonal sum; ``0x0`` blocks vanish."""
    nr = sum(b.nrows for b in blocks)
    nc = sum(b.ncols for b in blocks)
    out = [[0] * nc for _ in range(nr)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.nrows):
            out[r0 + i][c0:c0 + b.ncols] = b.row(i)
        r0 += b.nrows
        c0 += b.ncols
    return IntMatrix.from_rows(out, ncols=nc)


def block(top_left: IntMatrix, top_right: IntMatrix,
          bottom_left: IntMatrix, bottom_right: IntMatrix) -> IntMatrix:
    """Assemble ``[[TL, TR], [BL, BR]]`` with shape checks."""
    if top_left.nrows != top_right.nrows or bottom_left.nrows != bottom_right.nrows:
        raise DimensionError("block rows disagree")
    if top_left.ncols != bottom_left.ncols or top_right.ncols != bottom_right.ncols:
        raise DimensionError("block columns disagree")
    rows = [list(top_left.row(i)) + list(top_right.row(i)) for i in range(top_left.nrows)]
    rows += [list(bottom_left.row(i)) + list(bottom_right.row(i)) for i in range(bottom_left.nrows)]
    return IntMatrix.from_rows(rows, ncols=top_left.ncols + top_right.ncols)


# ----------------------------------------------------------------------
# determinants

def determinant(m) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = as_matrix(m)
    if not m.is_square:
        raise DimensionError(f"determinant of non-square {m.shape} matrix")
    n = m.nrows
    if n == 0:
        return 1
    a = m.rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                # exact: Sylvester's identity guarantees divisibility by prev
                ri[j] = (ri[j] * akk - aik * rk[j]) // prev
            ri[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def determinant_mod(m, q: int) -> int:
    """Determinant in ``Z/qZ`` for any modulus ``q >= 1``.

    Works for composite ``q`` by running the Euclidean algorithm down each
    column (row additions and swaps only), so no inverses are needed.
    """
    m = as_matrix(m)
    if q < 1:
        raise ValueError("modulus must be positive")
    if not m.is_square:
        raise DimensionError(f"determinant of non-square {m.shape} matrix")
    n = m.nrows
    a = [[x % q for x in r] for r in m.rows()]
    det = 1 % q
    for k in range(n):
        while True:
            live = [i for i in range(k, n) if a[i][k]]
            if not live:
                return 0
            p = min(live, key=lambda i: (a[i][k], i))
            if len(live) == 1:
                break
            piv = a[p][k]
            for i in live:
                if i != p:
                    f = a[i][k] // piv
                    a[i] = [(x - f * y) % q for x, y in zip(a[i], a[p])]
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det = det * a[k][k] % q
    return det % q


# ----------------------------------------------------------------------
# Smith normal form

@dataclass(frozen=True)
class SmithDecomposition:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular and ``D`` in Smith form."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.D[i, i] for i in range(min(self.D.shape)))


def _smallest_nonzero(a, t, nr, nc):
    best = None
    for i in range(t, nr):
        row = a[i]
        for j in range(t, nc):
            x = row[j]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), i, j)
    return best


def smith_normal_form(A) -> SmithDecomposition:
    """Smith normal form with unimodular witnesses.

    Pivot rule: smallest nonzero absolute value, first in row-major scan.
    Diagonal entries are non-negative and satisfy ``d1 | d2 | ...``.
    """
    A = as_matrix(A)
    nr, nc = A.shape
    a = A.rows()
    U = IntMatrix.identity(nr).rows()
    V = IntMatrix.identity(nc).rows()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, f):  # row_dst += f * row_src
        a[dst] = [x + f * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):  # col_dst += f * col_src
        for r in a:
            r[dst] += f * r[src]
        for r in V:
            r[dst] += f * r[src]

    for t in range(min(nr, nc)):
        best = _smallest_nonzero(a, t, nr, nc)
        if best is None:
            break
        _, i, j = best
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        while True:
            piv = a[t][t]
            for i in range(t + 1, nr):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // piv))
            for j in range(t + 1, nc):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // piv))
            # remainders smaller than the pivot become the next pivot
            cand = [(abs(a[i][t]), 0, i) for i in range(t + 1, nr) if a[i][t]]
            cand += [(abs(a[t][j]), 1, j) for j in range(t + 1, nc) if a[t][j]]
            if cand:
                _, kind, idx = min(cand)
                if kind == 0:
                    swap_rows(t, idx)
                else:
                    swap_cols(t, idx)
                continue
            bad = next(
                (i for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % piv),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]

    return SmithDecomposition(
        U=IntMatrix.from_rows(U, ncols=nr),
        D=IntMatrix.from_rows(a, ncols=nc),
        V=IntMatrix.from_rows(V, ncols=nc),
    )


# ----------------------------------------------------------------------
# abelian groups

@dataclass(frozen=True)
class AbelianGroupData:
    """``Z^free_rank ⊕ Z/d1 ⊕ ... ⊕ Z/dk`` with ``d1 | d2 | ...`` and all ``di > 1``."""

    free_rank: int = 0
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "invariant_factors", tuple(int(d) for d in self.invariant_factors))
        if self.free_rank < 0:
            raise ValueError("free rank must be non-negative")
        fs = self.invariant_factors
        if any(d <= 1 for d in fs):
            raise ValueError(f"invariant factors must exceed 1: {fs}")
        if any(fs[i + 1] % fs[i] for i in range(len(fs) - 1)):
            raise ValueError(f"invariant factors must form a divisibility chain: {fs}")

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.invariant_factors

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def torsion_order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def min_generators(self) -> int:
        """Minimal number of generators."""
        return self.free_rank + len(self.invariant_factors)

    def __add__(self, other: "AbelianGroupData") -> "AbelianGroupData":
        orders = list(self.invariant_factors) + list(other.invariant_factors)
        return AbelianGroupData(self.free_rank + other.free_rank,
                                cokernel(IntMatrix.diagonal(orders)).invariant_factors)

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts += [f"Z/{d}" for d in self.invariant_factors]
        return " ⊕ ".join(parts) if parts else "trivial"


def cokernel(A) -> AbelianGroupData:
    """``Z^cols / rowspace(A)`` as free rank plus invariant factors."""
    A = as_matrix(A)
    diag = smith_normal_form(A).diagonal
    rank = sum(1 for d in diag if d)
    return AbelianGroupData(A.ncols - rank, tuple(d for d in diag if d > 1))


# ----------------------------------------------------------------------
# rationals

def rational_inverse(M) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse over Q by Gauss-Jordan on Fractions."""
    M = as_matrix(M)
    if not M.is_square:
        raise DimensionError(f"inverse of non-square {M.shape} matrix")
    n = M.nrows
    a = [[Fraction(x) for x in M.row(i)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            raise SingularMatrixError("matrix is singular")
        a[k], a[p] = a[p], a[k]
        inv = 1 / a[k][k]
        a[k] = [x * inv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return tuple(tuple(r[n:]) for r in a)


def frac_matmul(A, B):
    """Product of two matrices given as nested sequences of numbers."""
    Bt = list(zip(*B)) if B else []
    return tuple(tuple(sum((x * y for x, y in zip(r, c)), Fraction(0)) for c in Bt) for r in A)


def is_unimodular(M) -> bool:
    M = as_matrix(M)
    return M.is_square and abs(determinant(M)) == 1
