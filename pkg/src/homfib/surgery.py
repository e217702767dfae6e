"""Rational surgery diagrams, reduced to their homological data.

A diagram is an ordered list of components with coefficients ``p/q`` and
a symmetric table of pairwise linking numbers.  Nothing about crossings
or knot types is stored: the determinant criterion and first homology
only see ``(p_i, q_i)`` and ``lk(L_i, L_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

from .linalg import AbelianGroupData, IntMatrix, cokernel
from .linking import LinkingDecomposition, normalize
from .problem import CandidateSolution


class DiagramValidationError(ValueError):
    pass


@dataclass(frozen=True)
class SurgeryComponent:
    """Surgery coefficient ``p/q``; ``q = 0`` (the trivial slope) is rejected."""

    p: int
    q: int

    def __post_init__(self):
        if self.q == 0:
            raise DiagramValidationError(
                f"component ({self.p}, {self.q}) has coefficient infinity; delete it instead"
            )
        if gcd(self.p, self.q) != 1:
            raise DiagramValidationError(f"component ({self.p}, {self.q}): p and q must be coprime")


@dataclass(frozen=True)
class SurgeryDiagram:
    components: tuple[SurgeryComponent, ...] = ()
    lk: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        comps = tuple(c if isinstance(c, SurgeryComponent) else SurgeryComponent(*c)
                      for c in self.components)
        m = len(comps)
        lk = tuple(tuple(int(x) for x in row) for row in self.lk) if self.lk else ((0,) * m,) * m
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "lk", lk)
        if len(lk) != m or any(len(r) != m for r in lk):
            raise DiagramValidationError(f"linking table must be {m}x{m}")
        for i in range(m):
            if lk[i][i] != 0:
                raise DiagramValidationError(
                    f"lk[{i}][{i}] = {lk[i][i]}: framings live in the coefficients, keep the diagonal 0"
                )
            for j in range(i):
                if lk[i][j] != lk[j][i]:
                    raise DiagramValidationError(f"linking table is not symmetric at ({i}, {j})")

    @classmethod
    def from_data(cls, components: Sequence[Sequence[int]], lk=None) -> "SurgeryDiagram":
        return cls(tuple(SurgeryComponent(int(p), int(q)) for p, q in components),
                   tuple(map(tuple, lk)) if lk is not None else ())

    @property
    def size(self) -> int:
        return len(self.components)


def phi_psi(d: SurgeryDiagram) -> tuple[IntMatrix, IntMatrix]:
    """``Phi[i][i] = p_i``, ``Phi[i][j] = q_i lk(L_i, L_j)``; ``Psi = diag(q_i)``."""
    m = d.size
    phi = [[d.components[i].p if i == j else d.components[i].q * d.lk[i][j] for j in range(m)]
           for i in range(m)]
    return IntMatrix.from_rows(phi, ncols=m), IntMatrix.diagonal([c.q for c in d.components])


def first_homology(d: SurgeryDiagram) -> AbelianGroupData:
    """Cokernel of Phi: meridians modulo the slope relations."""
    return cokernel(phi_psi(d)[0])


def orientation_flip(d: SurgeryDiagram, i: int) -> SurgeryDiagram:
    """Reverse component ``i`` (0-based): negate its row and column of ``lk``."""
    if not 0 <= i < d.size:
        raise IndexError(f"component index {i} out of range for {d.size} components")
    lk = [[-x if (a == i) != (b == i) else x for b, x in enumerate(row)] for a, row in enumerate(d.lk)]
    return SurgeryDiagram(d.components, tuple(map(tuple, lk)))


def transport_solution(sol: CandidateSolution, i: int) -> CandidateSolution:
    """Carry a solution across :func:`orientation_flip` of component ``i``: negate row ``i`` of X.

    The assembled matrix changes by the simultaneous sign change of its
    ``i``-th row and column, so the determinant is preserved exactly.
    """
    X = sol.X
    if not 0 <= i < X.nrows:
        raise IndexError(f"row {i} out of range for X with {X.nrows} rows")
    rows = [[-x for x in r] if a == i else r for a, r in enumerate(X.rows())]
    return CandidateSolution(IntMatrix.from_rows(rows, ncols=X.ncols), sol.Y)


def connected_sum(d1: SurgeryDiagram, d2: SurgeryDiagram) -> SurgeryDiagram:
    """Split union: components of ``d1`` then ``d2``, no linking across."""
    m1, m2 = d1.size, d2.size
    lk = [list(r) + [0] * m2 for r in d1.lk] + [[0] * m1 + list(r) for r in d2.lk]
    return SurgeryDiagram(d1.components + d2.components, tuple(map(tuple, lk)))


def unknot(p: int, q: int = 1) -> SurgeryDiagram:
    return SurgeryDiagram((SurgeryComponent(p, q),))


def lens_diagram(p: int, q: int) -> SurgeryDiagram:
    """``L(p, q)`` as one unknot with slope ``p / -q``."""
    return unknot(p, -q)


def _two_component(c1, c2, link: int) -> SurgeryDiagram:
    return SurgeryDiagram((SurgeryComponent(*c1), SurgeryComponent(*c2)), ((0, link), (link, 0)))


def representative_diagram(d: LinkingDecomposition) -> SurgeryDiagram:
    """Split diagram realising ``d``; its ``(Phi, Psi)`` equals ``theorem_matrices(d)``.

    The two-component pieces for ``E0(k)`` and ``E1(k)`` are pinned only by
    that equality: 0-framed unknots linking ``2^k`` times, respectively
    slopes ``2^(k+1)/-1`` and ``2^(k+1)/-3`` linking ``2^k`` times.
    """
    d = normalize(d)
    out = SurgeryDiagram()
    for _ in range(d.free_rank):
        out = connected_sum(out, unknot(0, 1))
    for t in d.a_terms:
        out = connected_sum(out, lens_diagram(t.p, t.q))
    for t in d.e0_terms:
        out = connected_sum(out, _two_component((0, 1), (0, 1), 2**t.k))
    for t in d.e1_terms:
        out = connected_sum(out, _two_component((2**(t.k + 1), -1), (2**(t.k + 1), -3), 2**t.k))
    return out
