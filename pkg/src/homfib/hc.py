"""Bounds and exact values of hc(M), the least genus of a homological fiber of a knot.

Lower bounds come from counting generators of ``H_1`` and from obstruction
certificates on fibers ``(g, 0)``; upper bounds from a table of known values
combined by subadditivity under connected sum, and, whenever the pieces can
be solved at desk scale, from an explicit verified solution assembled from
piece witnesses.

Two constructions make the witnesses composable (fibers ``(g, 0)`` only for
direct sums):

* direct sum: solutions for ``M1`` and ``M2`` with fibers ``(g1, 0)`` and
  ``(g2, 0)`` give one for ``M1 # M2`` with fiber ``(g1 + g2, 0)``;
* adding ``S^2 x S^1``: a solution for ``M`` with fiber ``(g, n)`` gives one
  for ``(S^2 x S^1) # M`` with fiber ``(g, n + 1)`` (:func:`add_handle_extra`)
  or, if ``n >= 1``, with fiber ``(g + 1, n - 1)`` (:func:`add_handle_pair`).
  The new component's row of ``X`` is a unit vector on a fresh fiber
  coordinate; expanding along it recovers the old determinant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import ceil
from typing import Union

from .engine import (DEFAULT_ENUMERATION_BUDGET, Exists, NotExists, disk_case,
                     find_obstruction, problem_from_decomposition, problem_from_diagram, search)
from .linalg import AbelianGroupData, IntMatrix
from .linking import A, E0, E1, GeneratorTerm, LinkingDecomposition, homology_of, normalize
from .problem import BlockProblem, CandidateSolution, FiberType, evaluate
from .surgery import SurgeryDiagram, first_homology

log = logging.getLogger(__name__)

ManifoldSpec = Union[LinkingDecomposition, SurgeryDiagram]

PIECE_BOUND = 4
PIECE_BUDGET = 2_000_000


def genus_lower_bound(H: AbelianGroupData, n: int = 0) -> int:
    """Least ``g`` with ``2g + n`` at least the number of generators of ``H``."""
    need = H.free_rank + len(H.invariant_factors) - n
    return max(0, ceil(need / 2))


# ----------------------------------------------------------------------
# the upper-bound table

def _is_qr(a: int, p: int) -> bool:
    return any((x * x - a) % p == 0 for x in range(p))


def piece_cost(term: GeneratorTerm | None, free: int) -> tuple[int, str] | None:
    """Known genus bound for ``(#^free S^2 x S^1) # M(term)``, with its source."""
    if term is None:
        return {1: (1, "hc(S2xS1) = 1"), 2: (1, "hc(#2 S2xS1) = 1")}.get(free)
    if isinstance(term, A):
        if free == 0:
            return 1, f"lens space value hc(M(A({term.p},{term.q}))) = 1"
        if free == 1:
            if _is_qr(term.q, term.p) or _is_qr(-term.q, term.p):
                return 1, f"(S2xS1)#lens: q or -q is a square mod {term.p}, genus 1"
            return 2, f"(S2xS1)#lens: neither q nor -q is a square mod {term.p}, genus 2"
        return None
    if isinstance(term, E0):
        if free == 0:
            return (1, "genus-one fibered knot in M(E0(1))") if term.k == 1 else (2, "genus-two fibered knot in M(E0(k))")
        return 2, f"(#{free} S2xS1)#M(E0(k)) has a genus-two fiber"
    if isinstance(term, E1):
        if free == 0:
            return (1, "genus-one solution for M(E1(2))") if term.k == 2 else (2, "genus-two fiber in M(E1(k))")
        if free == 1 and term.k >= 3:
            return 2, "Sigma_{1,2} solution for M(E1(k)) plus one handle"
        return None
    raise TypeError(f"unknown term {term!r}")


@dataclass(frozen=True)
class UpperPlan:
    """A subadditive split: ``(term, free copies absorbed, genus)`` per summand."""

    genus: int
    pieces: tuple[tuple[GeneratorTerm | None, int, int], ...]
    chain: tuple[str, ...]


def upper_plan(d: LinkingDecomposition) -> UpperPlan | None:
    d = normalize(d)
    terms, r = d.terms, d.free_rank
    # best[i][used] = (cost, pieces, chain) for terms[:i] having absorbed `used` free copies
    best: dict[int, tuple] = {0: (0, (), ())}
    for t in terms:
        nxt: dict[int, tuple] = {}
        for used, (cost, pieces, chain) in best.items():
            for c in (0, 1, 2):
                if used + c > r:
                    continue
                pc = piece_cost(t, c)
                if pc is None:
                    continue
                cand = (cost + pc[0], pieces + ((t, c, pc[0]),), chain + (pc[1],))
                if used + c not in nxt or cand[0] < nxt[used + c][0]:
                    nxt[used + c] = cand
        best = nxt
        if not best:
            return None
    out = None
    for used, (cost, pieces, chain) in sorted(best.items()):
        f = r - used
        extra_pieces, extra_chain = [], []
        for _ in range(f // 2):
            extra_pieces.append((None, 2, 1))
            extra_chain.append("hc(#2 S2xS1) = 1")
        if f % 2:
            extra_pieces.append((None, 1, 1))
            extra_chain.append("hc(S2xS1) = 1")
        total = cost + len(extra_pieces)
        if out is None or total < out.genus:
            out = UpperPlan(total, pieces + tuple(extra_pieces),
                            chain + tuple(extra_chain) + ("hc is subadditive under connected sum",))
    return out


def known_upper_bounds(spec: ManifoldSpec) -> tuple[int, tuple[str, ...]] | None:
    """Table bound for a decomposition, as ``(genus, evidence chain)``."""
    if isinstance(spec, SurgeryDiagram):
        raise TypeError("upper-bound table needs a linking decomposition, not a diagram")
    plan = upper_plan(spec)
    return None if plan is None else (plan.genus, plan.chain)


# ----------------------------------------------------------------------
# witness constructions

def add_handle_extra(problem: BlockProblem, sol: CandidateSolution) -> tuple[BlockProblem, CandidateSolution]:
    """``(S^2 x S^1) # M`` with fiber ``(g, n + 1)`` from ``M`` with fiber ``(g, n)``."""
    f = problem.fiber
    return _add_handle(problem, sol, FiberType(f.g, f.n + 1), f.d)


def add_handle_pair(problem: BlockProblem, sol: CandidateSolution) -> tuple[BlockProblem, CandidateSolution]:
    """``(S^2 x S^1) # M`` with fiber ``(g + 1, n - 1)`` from ``M`` with fiber ``(g, n)``, ``n >= 1``.

    The first extra coordinate of the old fiber is paired with the new one.
    """
    f = problem.fiber
    if f.n < 1:
        raise ValueError("pairing a new handle needs an extra fiber coordinate (n >= 1)")
    return _add_handle(problem, sol, FiberType(f.g + 1, f.n - 1), 2 * f.g + 1)


def _add_handle(problem, sol, fiber, pos):
    m, d = problem.m, problem.d
    M0 = IntMatrix.from_rows([[0] * (m + 1)] + [[0] + list(r) for r in problem.M0.rows()], ncols=m + 1)
    W = IntMatrix.from_rows([[1] + [0] * m] + [[0] + list(r) for r in problem.W.rows()], ncols=m + 1)

    def widen(row):
        row = list(row)
        return row[:pos] + [0] + row[pos:]

    X = [[0] * (d + 1)] + [widen(r) for r in sol.X.rows()]
    X[0][pos] = 1
    Y = [widen(r) for r in sol.Y.rows()]
    Y = Y[:pos] + [[0] * (d + 1)] + Y[pos:]
    return (BlockProblem(M0, W, fiber, problem.provenance),
            CandidateSolution(IntMatrix.from_rows(X, ncols=d + 1), IntMatrix.from_rows(Y, ncols=d + 1)))


def extend_fiber(problem: BlockProblem, sol: CandidateSolution) -> tuple[BlockProblem, CandidateSolution]:
    """Same manifold, fiber ``(g, n + 1)``: a new coordinate with ``Y = 1`` and zero ``X`` column."""
    f = problem.fiber
    d = problem.d
    X = [list(r) + [0] for r in sol.X.rows()]
    Y = [list(r) + [0] for r in sol.Y.rows()] + [[0] * d + [1]]
    return (problem.with_fiber(FiberType(f.g, f.n + 1)),
            CandidateSolution(IntMatrix.from_rows(X, ncols=d + 1), IntMatrix.from_rows(Y, ncols=d + 1)))


def _layout(d: LinkingDecomposition) -> list[tuple[object, int, int]]:
    """``(label, offset, size)`` per summand in ``theorem_matrices`` order."""
    out, off = [], 0
    for _ in range(d.free_rank):
        out.append(("free", off, 1))
        off += 1
    for t in d.terms:
        size = 1 if isinstance(t, A) else 2
        out.append((t, off, size))
        off += size
    return out


def direct_sum_witness(parts: list[tuple[LinkingDecomposition, CandidateSolution, int]]
                       ) -> tuple[BlockProblem, CandidateSolution]:
    """Solution for the connected sum from ``(decomposition, solution, genus)`` parts, fibers ``(g_i, 0)``."""
    parts = [(normalize(d), s, g) for d, s, g in parts]
    total = LinkingDecomposition()
    for d, _, _ in parts:
        total = total + d
    G = sum(g for _, _, g in parts)
    layout = _layout(total)
    m, D = total.size, 2 * G
    X = [[0] * D for _ in range(m)]
    Y = [[0] * D for _ in range(D)]
    taken = [False] * len(layout)
    col = 0
    for d, s, g in parts:
        if s.Y.nrows != 2 * g:
            raise ValueError("direct sums need fibers (g, 0)")
        for label, off, size in _layout(d):
            key = "free" if label == "free" else label
            slot = next(i for i, (lab, _, _) in enumerate(layout) if not taken[i] and lab == key)
            taken[slot] = True
            goff = layout[slot][1]
            for a in range(size):
                for b in range(2 * g):
                    X[goff + a][col + b] = s.X[off + a, b]
        for a in range(2 * g):
            for b in range(2 * g):
                Y[col + a][col + b] = s.Y[a, b]
        col += 2 * g
    problem = problem_from_decomposition(total, FiberType(G, 0))
    return problem, CandidateSolution(IntMatrix.from_rows(X, ncols=D), IntMatrix.from_rows(Y, ncols=D))


# ----------------------------------------------------------------------
# piece witnesses

def _solve(d: LinkingDecomposition, fiber: FiberType, bound: int, budget: int):
    p = problem_from_decomposition(d, fiber)
    v = search(p, bound, budget)
    return (p, v.solution) if isinstance(v, Exists) else None


def sigma12_witness(k: int, bound: int = 8, budget: int | None = PIECE_BUDGET) -> CandidateSolution | None:
    """Fiber ``(1, 1)`` solution for ``M(E1(k))``, ``k >= 3``, lifted from a lens-type problem.

    Setting the last fiber column of ``X`` to ``(1, 0)^t`` and the rest of
    the last fiber coordinate to zero reduces the equation to
    ``det [[2^(k+1), -3z, -3w], [z, a, b+1], [w, b, c]] = ±1``, which is the
    genus-one problem for ``M0 = (2^(k+1))``, ``W = (-3)``.
    Returns None if the bounded search finds nothing.
    """
    if k < 3:
        raise ValueError("sigma12_witness needs k >= 3")
    reduced = BlockProblem(IntMatrix.from_rows([[2**(k + 1)]]), IntMatrix.from_rows([[-3]]), FiberType(1, 0))
    v = search(reduced, bound, budget)
    if not isinstance(v, Exists):
        return None
    (z, w), Yr = v.solution.X.row(0), v.solution.Y
    a, b, c = Yr[0, 0], Yr[0, 1], Yr[1, 1]
    X = IntMatrix.from_rows([[0, 0, 1], [z, w, 0]])
    Y = IntMatrix.from_rows([[a, b, 0], [b, c, 0], [0, 0, 0]])
    return CandidateSolution(X, Y)


def piece_witness(term: GeneratorTerm | None, free: int, genus: int, *,
                  bound: int = PIECE_BOUND, budget: int = PIECE_BUDGET):
    """Verified solution for ``(#^free S^2 x S^1) # M(term)`` at fiber ``(genus, 0)``, or None."""
    d = LinkingDecomposition(free, (term,) if term is not None else ())
    if free == 0 or genus == 1:
        got = _solve(d, FiberType(genus, 0), bound, budget)
        return got[1] if got else None
    base = LinkingDecomposition(0, (term,))
    if free == 1:
        sol11 = None
        if isinstance(term, E1) and term.k >= 3:
            sol11 = sigma12_witness(term.k, max(bound, 8), budget)
            p11 = problem_from_decomposition(base, FiberType(1, 1)) if sol11 else None
        if sol11 is None:
            got = _solve(base, FiberType(1, 0), bound, budget)
            if got:
                p11, sol11 = extend_fiber(*got)
            else:
                got = _solve(base, FiberType(1, 1), bound, budget)
                if got is None:
                    return None
                p11, sol11 = got
        _, sol = add_handle_pair(p11, sol11)
        return sol if genus == 2 else None
    if free == 2 and genus == 2:
        got = _solve(base, FiberType(0, 2), bound, budget)
        if got is None:
            return None
        p, s = add_handle_pair(*got)
        _, s = add_handle_pair(p, s)
        return s
    return None


def plan_witness(plan: UpperPlan, **kw) -> tuple[BlockProblem, CandidateSolution] | None:
    parts = []
    for term, free, genus in plan.pieces:
        sol = piece_witness(term, free, genus, **kw)
        if sol is None:
            return None
        parts.append((LinkingDecomposition(free, (term,) if term is not None else ()), sol, genus))
    return direct_sum_witness(parts)


# ----------------------------------------------------------------------
# hc

@dataclass(frozen=True)
class Evidence:
    """One step of an hc argument; ``payload`` is a verdict when it can be re-checked."""

    kind: str  # lower-bound | not-exists | exists | table | unknown
    genus: int
    detail: str
    problem: BlockProblem | None = None
    payload: object = None

    def recheck(self) -> bool:
        if isinstance(self.payload, (Exists, NotExists)):
            return self.payload.recheck(self.problem)
        return True


@dataclass(frozen=True)
class HcBounds:
    lower: int
    upper: int | None = None
    exact: int | None = None
    evidence: tuple[Evidence, ...] = ()

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.exact is not None and not (self.lower == self.exact == self.upper):
            raise ValueError("exact value requires lower = upper")

    def __str__(self):
        if self.exact is not None:
            return f"hc = {self.exact}"
        return f"{self.lower} <= hc <= {self.upper if self.upper is not None else '?'}"


def _homology(spec: ManifoldSpec) -> AbelianGroupData:
    return first_homology(spec) if isinstance(spec, SurgeryDiagram) else homology_of(spec)


def _problem(spec: ManifoldSpec, g: int) -> BlockProblem:
    f = FiberType(g, 0)
    if isinstance(spec, SurgeryDiagram):
        return problem_from_diagram(spec, f)
    return problem_from_decomposition(spec, f)


def hc_compute(spec: ManifoldSpec, search_bound: int = 4, budget: int | None = PIECE_BUDGET, *,
               max_genus: int | None = None, enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
               workers: int = 1, witnesses: bool = True) -> HcBounds:
    """Walk up from the generator-count bound until an answer or an honest interval."""
    if isinstance(spec, LinkingDecomposition):
        spec = normalize(spec)
    H = _homology(spec)
    lower = genus_lower_bound(H, 0)
    ev: list[Evidence] = [Evidence("lower-bound", lower,
                                   f"H1 = {H} needs {H.free_rank + len(H.invariant_factors)} generators")]
    plan = upper_plan(spec) if isinstance(spec, LinkingDecomposition) else None
    upper = plan.genus if plan else None
    if plan:
        ev.append(Evidence("table", plan.genus, "; ".join(plan.chain)))

    if lower == 0:
        if disk_case(H):
            return HcBounds(0, 0, 0, tuple(ev) + (Evidence("exists", 0, "integral homology sphere: disk fiber"),))
        lower = 1  # not reached: nontrivial H needs a generator

    g = lower
    while upper is None or g < upper:
        if max_genus is not None and g > max_genus:
            return HcBounds(lower, upper, None, tuple(ev))
        p = _problem(spec, g)
        cert = find_obstruction(p, budget=enumeration_budget)
        if cert is not None:
            ev.append(Evidence("not-exists", g, f"{cert.kind} mod {cert.modulus}: attainable {cert.attainable}",
                               p, NotExists(cert)))
            g += 1
            lower = g
            continue
        v = search(p, search_bound, budget, workers=workers)
        if isinstance(v, Exists):
            ev.append(Evidence("exists", g, f"solution with det {v.det}", p, v))
            return HcBounds(g, g, g, tuple(ev))
        ev.append(Evidence("unknown", g, f"no solution with entries <= {search_bound} "
                                        f"({v.examined} candidates, budget exhausted: {v.budget_exhausted})", p, v))
        return HcBounds(lower, upper, None, tuple(ev))

    # lower has met the table bound
    if witnesses and plan is not None:
        built = plan_witness(plan)
        if built is not None:
            p, sol = built
            det = evaluate(p, sol)
            if abs(det) == 1:
                ev.append(Evidence("exists", upper, "assembled from piece witnesses", p, Exists(sol, det)))
    return HcBounds(upper, upper, upper, tuple(ev))
