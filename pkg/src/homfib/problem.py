"""The block determinant equation.

For blocks ``M0`` (``m x m``), ``W`` (``m x m``, invertible over Q) and a
fiber type ``(g, n)`` with ``d = 2g + n``, a candidate ``(X, Y)`` with
``X`` of shape ``m x d`` and ``Y`` symmetric ``d x d`` is a solution when

    det [[M0, W X], [X^t, Y + (E ⊕ O_n)]] = ±1

where ``E`` is ``2g x 2g`` with a single ``1`` at each ``(2i-1, 2i)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

from .linalg import DimensionError, IntMatrix, as_matrix, block, determinant


class ProblemValidationError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class FiberType:
    """Fiber ``Σ_{g, n+1}``: genus ``g`` with ``n + 1`` boundary components."""

    g: int
    n: int = 0

    def __post_init__(self):
        if self.g < 0 or self.n < 0:
            raise ProblemValidationError(f"fiber type needs g, n >= 0, got ({self.g}, {self.n})")

    @property
    def d(self) -> int:
        return 2 * self.g + self.n

    @property
    def is_disk(self) -> bool:
        return self.g == 0 and self.n == 0

    def __str__(self):
        return f"Σ_{{{self.g},{self.n + 1}}}"


def e_matrix(fiber: FiberType) -> IntMatrix:
    """``E ⊕ O_n``: ones at ``(2i-1, 2i)`` (1-based) for ``i <= g``."""
    d = fiber.d
    rows = [[0] * d for _ in range(d)]
    for i in range(fiber.g):
        rows[2 * i][2 * i + 1] = 1
    return IntMatrix.from_rows(rows, ncols=d)


@dataclass(frozen=True)
class BlockProblem:
    M0: IntMatrix
    W: IntMatrix
    fiber: FiberType
    provenance: str = "theorem"

    def __post_init__(self):
        object.__setattr__(self, "M0", as_matrix(self.M0))
        object.__setattr__(self, "W", as_matrix(self.W))
        m = self.M0.nrows
        if self.M0.shape != (m, m) or self.W.shape != (m, m):
            raise ProblemValidationError(f"M0 and W must be square of equal size, got {self.M0.shape}, {self.W.shape}")
        if determinant(self.W) == 0:
            raise ProblemValidationError("W must be invertible over the rationals")
        if self.provenance not in ("theorem", "surgery", "reduced"):
            raise ProblemValidationError(f"unknown provenance {self.provenance!r}")

    @property
    def m(self) -> int:
        return self.M0.nrows

    @property
    def d(self) -> int:
        return self.fiber.d

    @property
    def num_variables(self) -> int:
        d = self.d
        return self.m * d + d * (d + 1) // 2

    def canonical_string(self) -> str:
        """Dimension-prefixed, row-major, decimal encoding of ``M0 ‖ W ‖ g ‖ n``."""
        def enc(M: IntMatrix) -> str:
            return f"{M.nrows}x{M.ncols}:" + ",".join(str(x) for x in M.entries)
        return f"{enc(self.M0)}|{enc(self.W)}|g={self.fiber.g}|n={self.fiber.n}"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_string().encode()).hexdigest()

    def with_fiber(self, fiber: FiberType) -> "BlockProblem":
        return BlockProblem(self.M0, self.W, fiber, self.provenance)


@dataclass(frozen=True)
class CandidateSolution:
    X: IntMatrix
    Y: IntMatrix

    def __post_init__(self):
        object.__setattr__(self, "X", as_matrix(self.X) if not isinstance(self.X, IntMatrix) else self.X)
        object.__setattr__(self, "Y", as_matrix(self.Y) if not isinstance(self.Y, IntMatrix) else self.Y)
        if not self.Y.is_square:
            raise ProblemValidationError(f"Y must be square, got {self.Y.shape}")
        if not self.Y.is_symmetric():
            raise ProblemValidationError("Y must be symmetric")

    @classmethod
    def from_vector(cls, values: Sequence[int], m: int, d: int) -> "CandidateSolution":
        """Unpack ``X`` row-major then the upper triangle of ``Y`` row-major."""
        values = [int(v) for v in values]
        if len(values) != m * d + d * (d + 1) // 2:
            raise DimensionError(f"{len(values)} values for m={m}, d={d}")
        X = IntMatrix(m, d, tuple(values[:m * d]))
        y = [[0] * d for _ in range(d)]
        it = iter(values[m * d:])
        for i in range(d):
            for j in range(i, d):
                y[i][j] = y[j][i] = next(it)
        return cls(X, IntMatrix.from_rows(y, ncols=d))

    def to_vector(self) -> tuple[int, ...]:
        d = self.Y.nrows
        return self.X.entries + tuple(self.Y[i, j] for i in range(d) for j in range(i, d))


def _check_dims(p: BlockProblem, c: CandidateSolution):
    if c.X.shape != (p.m, p.d):
        raise DimensionError(f"X must be {p.m}x{p.d}, got {c.X.nrows}x{c.X.ncols}")
    if c.Y.shape != (p.d, p.d):
        raise DimensionError(f"Y must be {p.d}x{p.d}, got {c.Y.nrows}x{c.Y.ncols}")


def assemble(p: BlockProblem, c: CandidateSolution) -> IntMatrix:
    """``[[M0, W X], [X^t, Y + (E ⊕ O_n)]]``."""
    _check_dims(p, c)
    return block(p.M0, p.W @ c.X, c.X.T, c.Y + e_matrix(p.fiber))


def evaluate(p: BlockProblem, c: CandidateSolution) -> int:
    """Determinant of the assembled matrix."""
    return determinant(assemble(p, c))


def verify(p: BlockProblem, c: CandidateSolution) -> bool:
    return abs(evaluate(p, c)) == 1
