"""Linkings on finite abelian groups.

A linking is a finite abelian group with a non-singular symmetric
pairing into ``Q/Z``.  Under direct sum they are generated by three
families (Wall):

* ``A(p, q)``  on ``Z/p``,            gram ``(q/p)``
* ``E0(k)``    on ``(Z/2^k)^2``,      gram ``[[0, 2^-k], [2^-k, 0]]``
* ``E1(k)``    on ``(Z/2^k)^2``,      gram ``[[2^(1-k), 2^-k], [2^-k, 2^(1-k)]]``

:class:`LinkingDecomposition` records a free rank plus a list of such
terms; :func:`theorem_matrices` turns it into the ``S``/``T`` blocks of
the determinant criterion.  :class:`LinkingGram` is a concrete pairing
on chosen generators, produced either from a generator or from Heegaard
gluing data, and :func:`gram_equivalent` decides isomorphism by brute
force for small groups.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence, Union

from .linalg import (
    AbelianGroupData,
    IntMatrix,
    as_matrix,
    cokernel,
    determinant,
    direct_sum,
    rational_inverse,
    smith_normal_form,
)


class LinkingValidationError(ValueError):
    """Malformed generator term, decomposition or gluing data."""


class CapacityError(RuntimeError):
    """An enumeration would exceed its configured bound (not a mathematical answer)."""


# ----------------------------------------------------------------------
# generator terms

@dataclass(frozen=True, order=True)
class A:
    """``A^p(q)``; ``p = 1`` is the trivial linking."""

    p: int
    q: int

    kind = "A"

    def validate(self):
        if self.p < 1:
            raise LinkingValidationError(f"A(p, q) needs p >= 1, got p={self.p}")
        if gcd(self.p, self.q) != 1:
            raise LinkingValidationError(f"A({self.p}, {self.q}): p and q must be coprime")

    @property
    def trivial(self) -> bool:
        return self.p == 1


@dataclass(frozen=True, order=True)
class E0:
    """``E^k_0``; ``k = 0`` is the trivial linking."""

    k: int

    kind = "E0"

    def validate(self):
        if self.k < 0:
            raise LinkingValidationError(f"E0(k) needs k >= 0, got {self.k}")

    @property
    def trivial(self) -> bool:
        return self.k == 0


@dataclass(frozen=True, order=True)
class E1:
    """``E^k_1``; defined for ``k >= 2``, ``k = 0`` is the trivial linking."""

    k: int

    kind = "E1"

    def validate(self):
        if self.k < 0 or self.k == 1:
            raise LinkingValidationError(f"E1(k) needs k = 0 or k >= 2, got {self.k}")

    @property
    def trivial(self) -> bool:
        return self.k == 0


GeneratorTerm = Union[A, E0, E1]

_FAMILY_ORDER = {"A": 0, "E0": 1, "E1": 2}


def _term_key(t: GeneratorTerm):
    if isinstance(t, A):
        return (0, t.p, t.q)
    return (_FAMILY_ORDER[t.kind], t.k, 0)


@dataclass(frozen=True)
class LinkingDecomposition:
    """Free rank ``r`` and an ordered list of generator terms."""

    free_rank: int = 0
    terms: tuple[GeneratorTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.free_rank < 0:
            raise LinkingValidationError("free rank must be non-negative")

    @property
    def a_terms(self) -> list[A]:
        return [t for t in self.terms if isinstance(t, A)]

    @property
    def e0_terms(self) -> list[E0]:
        return [t for t in self.terms if isinstance(t, E0)]

    @property
    def e1_terms(self) -> list[E1]:
        return [t for t in self.terms if isinstance(t, E1)]

    @property
    def size(self) -> int:
        """``r + a + 2 e0 + 2 e1``, the side of ``S`` and ``T``."""
        return self.free_rank + sum(1 if isinstance(t, A) else 2 for t in self.terms)

    def is_normalized(self) -> bool:
        return self == normalize(self)

    def __add__(self, other: "LinkingDecomposition") -> "LinkingDecomposition":
        return direct_sum_decomposition(self, other)

    def __str__(self):
        parts = []
        if self.free_rank:
            parts.append(f"#{self.free_rank}(S2xS1)" if self.free_rank > 1 else "S2xS1")
        for t in self.terms:
            parts.append(f"A({t.p},{t.q})" if isinstance(t, A) else f"{t.kind}({t.k})")
        return " # ".join(parts) if parts else "S3"


def normalize(d: LinkingDecomposition) -> LinkingDecomposition:
    """Drop trivial terms and sort: A by ``(p, q)``, then E0 by ``k``, then E1 by ``k``."""
    for t in d.terms:
        if not isinstance(t, (A, E0, E1)):
            raise LinkingValidationError(f"unknown generator term {t!r}")
        t.validate()
    kept = sorted((t for t in d.terms if not t.trivial), key=_term_key)
    return LinkingDecomposition(d.free_rank, tuple(kept))


def direct_sum_decomposition(d1: LinkingDecomposition, d2: LinkingDecomposition) -> LinkingDecomposition:
    return normalize(LinkingDecomposition(d1.free_rank + d2.free_rank, d1.terms + d2.terms))


def homology_of(d: LinkingDecomposition) -> AbelianGroupData:
    """First homology ``Z^r ⊕ TH`` determined by the decomposition."""
    orders = []
    for t in normalize(d).terms:
        if isinstance(t, A):
            orders.append(t.p)
        else:
            orders += [2**t.k, 2**t.k]
    torsion = cokernel(IntMatrix.diagonal(orders)) if orders else AbelianGroupData()
    return AbelianGroupData(d.free_rank, torsion.invariant_factors)


# ----------------------------------------------------------------------
# the S and T blocks

def f0(k: int) -> IntMatrix:
    return IntMatrix.from_rows([[0, 2**k], [2**k, 0]])


def f1(k: int) -> IntMatrix:
    return IntMatrix.from_rows([[2**(k + 1), -(2**k)], [-3 * 2**k, 2**(k + 1)]])


def g1(k: int) -> IntMatrix:
    return IntMatrix.diagonal([-1, -3])


def theorem_matrices(d: LinkingDecomposition) -> tuple[IntMatrix, IntMatrix]:
    """``(S, T)`` assembled free -> A -> E0 -> E1."""
    d = normalize(d)
    s_blocks = [IntMatrix.zeros(d.free_rank)]
    t_blocks = [IntMatrix.identity(d.free_rank)]
    for t in d.a_terms:
        s_blocks.append(IntMatrix.diagonal([t.p]))
        t_blocks.append(IntMatrix.diagonal([-t.q]))
    for t in d.e0_terms:
        s_blocks.append(f0(t.k))
        t_blocks.append(IntMatrix.identity(2))
    for t in d.e1_terms:
        s_blocks.append(f1(t.k))
        t_blocks.append(g1(t.k))
    return direct_sum(*s_blocks), direct_sum(*t_blocks)


# ----------------------------------------------------------------------
# concrete grams

def _mod1(x) -> Fraction:
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class LinkingGram:
    """Pairing values ``gram[i][j] in Q/Z`` on generators of orders ``orders[i]``.

    The generators need not be in invariant-factor form (a direct sum of
    ``A(3, 1)`` and ``A(2, 1)`` keeps orders ``(3, 2)``); :attr:`group`
    gives the abstract group.
    """

    orders: tuple[int, ...]
    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        orders = tuple(int(o) for o in self.orders)
        gram = tuple(tuple(_mod1(x) for x in row) for row in self.gram)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "gram", gram)
        n = len(orders)
        if any(o < 1 for o in orders):
            raise LinkingValidationError(f"generator orders must be positive: {orders}")
        if len(gram) != n or any(len(r) != n for r in gram):
            raise LinkingValidationError("gram shape does not match the generators")

    @property
    def group(self) -> AbelianGroupData:
        if not self.orders:
            return AbelianGroupData()
        return cokernel(IntMatrix.diagonal(self.orders))

    @property
    def order(self) -> int:
        out = 1
        for o in self.orders:
            out *= o
        return out

    def is_symmetric(self) -> bool:
        n = len(self.orders)
        return all(self.gram[i][j] == self.gram[j][i] for i in range(n) for j in range(i))

    def is_well_defined(self) -> bool:
        """``order(g_i) * gram[i][j] = 0 mod 1`` for all ``i, j``."""
        n = len(self.orders)
        return all(_mod1(self.orders[i] * self.gram[i][j]) == 0 for i in range(n) for j in range(n))

    def pair(self, u: Sequence[int], v: Sequence[int]) -> Fraction:
        n = len(self.orders)
        return _mod1(sum(u[i] * v[j] * self.gram[i][j] for i in range(n) for j in range(n)
                         if u[i] and v[j]))

    def elements(self):
        return itertools.product(*(range(o) for o in self.orders))

    def is_nonsingular(self) -> bool:
        """Brute force: only the zero element pairs trivially with every generator."""
        n = len(self.orders)
        basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]
        for x in self.elements():
            if any(x) and all(self.pair(x, b) == 0 for b in basis):
                return False
        return True

    def negate(self) -> "LinkingGram":
        """The form of the oppositely oriented manifold."""
        return LinkingGram(self.orders, tuple(tuple(-x for x in r) for r in self.gram))

    def __add__(self, other: "LinkingGram") -> "LinkingGram":
        n, m = len(self.orders), len(other.orders)
        z = Fraction(0)
        gram = [list(r) + [z] * m for r in self.gram] + [[z] * n + list(r) for r in other.gram]
        return LinkingGram(self.orders + other.orders, tuple(map(tuple, gram)))


def gram_of_generator(t: GeneratorTerm) -> LinkingGram:
    t.validate()
    if t.trivial:
        raise LinkingValidationError(f"{t!r} is the trivial linking")
    if isinstance(t, A):
        return LinkingGram((t.p,), ((Fraction(t.q, t.p),),))
    n = 2**t.k
    if isinstance(t, E0):
        return LinkingGram((n, n), ((Fraction(0), Fraction(1, n)), (Fraction(1, n), Fraction(0))))
    return LinkingGram((n, n), ((Fraction(2, n), Fraction(1, n)), (Fraction(1, n), Fraction(2, n))))


def gram_of_decomposition(d: LinkingDecomposition) -> LinkingGram:
    out = LinkingGram((), ())
    for t in normalize(d).terms:
        out = out + gram_of_generator(t)
    return out


# ----------------------------------------------------------------------
# Heegaard data

@dataclass(frozen=True)
class HeegaardGluingData:
    """Blocks ``A``, ``B`` of the gluing map on ``H_1`` of the splitting surface.

    ``(A B)`` must be the top half of a symplectic matrix, which for us
    means ``A @ B.T`` is symmetric.  ``det B != 0`` (rational homology
    sphere) is checked where it matters.
    """

    A: IntMatrix
    B: IntMatrix

    def __post_init__(self):
        object.__setattr__(self, "A", as_matrix(self.A))
        object.__setattr__(self, "B", as_matrix(self.B))
        g = self.A.nrows
        if self.A.shape != (g, g) or self.B.shape != (g, g):
            raise LinkingValidationError(f"A and B must both be g x g, got {self.A.shape}, {self.B.shape}")
        if not (self.A @ self.B.T).is_symmetric():
            raise LinkingValidationError("A B^t is not symmetric; (A B) is not the top of a symplectic matrix")

    @property
    def genus(self) -> int:
        return self.A.nrows

    def homology(self) -> AbelianGroupData:
        """``Z^g / B^t Z^g``: the rows of ``B`` are the relations."""
        return cokernel(self.B)


def heegaard_pairing_matrix(h: HeegaardGluingData) -> tuple[tuple[Fraction, ...], ...]:
    """``-B^{-1} A`` reduced mod 1, on the standard generators of ``Z^g``."""
    if determinant(h.B) == 0:
        raise LinkingValidationError("det B = 0: not a rational homology sphere")
    Binv = rational_inverse(h.B)
    g = h.genus
    return tuple(
        tuple(_mod1(-sum(Binv[i][l] * h.A[l, j] for l in range(g))) for j in range(g))
        for i in range(g)
    )


def linking_form_from_heegaard(h: HeegaardGluingData) -> LinkingGram:
    """Torsion linking form on the Smith generators of ``Z^g / B^t Z^g``.

    With ``U B V = D``, the substitution ``y = x V`` carries the relation
    lattice onto ``rowspace(D)``, so the ``i``-th cyclic generator is row
    ``i`` of ``V^{-1}``.  Cyclic factors of order 1 are dropped.
    """
    G = heegaard_pairing_matrix(h)
    snf = smith_normal_form(h.B)
    Vinv = rational_inverse(snf.V)  # integral because V is unimodular
    keep = [i for i, d in enumerate(snf.diagonal) if d > 1]
    g = h.genus
    gens = [[int(Vinv[i][j]) for j in range(g)] for i in keep]
    gram = tuple(
        tuple(_mod1(sum(u[a] * v[b] * G[a][b] for a in range(g) for b in range(g))) for v in gens)
        for u in gens
    )
    return LinkingGram(tuple(snf.diagonal[i] for i in keep), gram)


def lens_heegaard(p: int, q: int) -> HeegaardGluingData:
    """Genus-one data ``A = (-r)``, ``B = (-p)`` with ``-r q - s p = 1``."""
    if gcd(p, q) != 1:
        raise LinkingValidationError("p and q must be coprime")
    # -r q = 1 (mod p)
    r = (-pow(q, -1, p)) % p if p > 1 else 0
    return HeegaardGluingData(IntMatrix.from_rows([[-r]]), IntMatrix.from_rows([[-p]]))


def e0_heegaard(k: int) -> HeegaardGluingData:
    n = 2**k
    return HeegaardGluingData(IntMatrix.from_rows([[0, 1], [1, 1]]),
                              IntMatrix.from_rows([[n, 0], [-n, n]]))


def e1_heegaard(k: int) -> HeegaardGluingData:
    n = 2**k
    return HeegaardGluingData(IntMatrix.from_rows([[0, -1], [-3, 3]]),
                              IntMatrix.from_rows([[n, 2 * n], [-n, -3 * n]]))


# ----------------------------------------------------------------------
# equivalence by enumeration

def _element_order(x, orders) -> int:
    out = 1
    for c, o in zip(x, orders):
        out = lcm(out, o // gcd(c, o))
    return out


def _generates(images, orders) -> bool:
    rel = [list(v) for v in images] + [[o if i == j else 0 for j in range(len(orders))]
                                       for i, o in enumerate(orders)]
    g = cokernel(IntMatrix.from_rows(rel, ncols=len(orders)))
    return g.is_trivial


def gram_equivalent(g1: LinkingGram, g2: LinkingGram, order_bound: int = 4096) -> bool:
    """True iff some group isomorphism carries ``g1`` onto ``g2``.

    Images of ``g1``'s generators are chosen one at a time among elements
    of ``g2``'s group with the same order and matching pairings against
    the images already chosen; a full assignment is accepted once it is
    checked to generate the target (equal orders make it bijective).
    """
    for g in (g1, g2):
        if g.order > order_bound:
            raise CapacityError(f"group of order {g.order} exceeds bound {order_bound}")
    if g1.group != g2.group:
        return False
    n = len(g1.orders)
    if n == 0:
        return True

    by_order: dict[int, list[tuple[int, ...]]] = {}
    for x in g2.elements():
        by_order.setdefault(_element_order(x, g2.orders), []).append(x)

    cands = []
    for i in range(n):
        target = g1.gram[i][i]
        cands.append([x for x in by_order.get(g1.orders[i], []) if g2.pair(x, x) == target])
        if not cands[-1]:
            return False

    chosen: list[tuple[int, ...]] = []

    def extend(i: int) -> bool:
        if i == n:
            return _generates(chosen, g2.orders)
        for x in cands[i]:
            if all(g2.pair(chosen[j], x) == g1.gram[j][i] for j in range(i)):
                chosen.append(x)
                if extend(i + 1):
                    return True
                chosen.pop()
        return False

    return extend(0)


def _prime_powers(n: int) -> list[tuple[int, int]]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def _odd_classes(p: int, e: int) -> list[int]:
    """Representatives ``1`` and a non-residue: forms on ``Z/p^e``, ``p`` odd, up to isomorphism."""
    nonres = next(a for a in range(2, p) if pow(a, (p - 1) // 2, p) == p - 1) if p > 2 else 1
    return [1, nonres]


def _two_part_options(exps: list[int]) -> list[list[GeneratorTerm]]:
    """Ways to cover cyclic factors ``Z/2^e`` by singles ``A(2^e, u)`` or equal-exponent pairs ``E0/E1``."""
    if not exps:
        return [[]]
    e, rest = exps[0], exps[1:]
    out = []
    units = [u for u in (1, 3, 5, 7) if u < 2**e] or [1]
    for u in units:
        for tail in _two_part_options(rest):
            out.append([A(2**e, u)] + tail)
    if e in rest:
        i = rest.index(e)
        others = rest[:i] + rest[i + 1:]
        pairs = [E0(e)] + ([E1(e)] if e >= 2 else [])
        for t in pairs:
            for tail in _two_part_options(others):
                out.append([t] + tail)
    return out


def candidate_decompositions(H: AbelianGroupData, limit: int = 512) -> list[LinkingDecomposition]:
    """Generator decompositions whose group is ``H`` (finitely many per isomorphism class tried)."""
    odd_factors: list[tuple[int, int]] = []
    two_exps: list[int] = []
    for d in H.invariant_factors:
        for p, e in _prime_powers(d):
            if p == 2:
                two_exps.append(e)
            else:
                odd_factors.append((p, e))
    odd_choices = [[A(p**e, q) for q in _odd_classes(p, e)] for p, e in odd_factors]
    out = []
    for two in _two_part_options(sorted(two_exps)):
        for odd in itertools.product(*odd_choices):
            out.append(normalize(LinkingDecomposition(H.free_rank, tuple(two) + tuple(odd))))
            if len(out) >= limit:
                return list(dict.fromkeys(out))
    return list(dict.fromkeys(out))


def match_generator(gram: LinkingGram, free_rank: int = 0, order_bound: int = 4096
                    ) -> LinkingDecomposition | None:
    """A generator decomposition whose form is equivalent to ``gram``, or None if none is found."""
    H = AbelianGroupData(free_rank, gram.group.invariant_factors)
    for d in candidate_decompositions(H):
        if gram_equivalent(gram, gram_of_decomposition(d), order_bound):
            return d
    return None
