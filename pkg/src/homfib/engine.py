"""Decision engine: build the block equation, certify or refute it, reduce solutions.

The entry points are :func:`decide` (obstructions first, then bounded
search) and the individual pieces it is made of.  Verdicts carry their own
evidence and can be re-checked against the problem they were issued for.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import AbelianGroupData, IntMatrix, cokernel, determinant
from .modular import factorize
from .linking import CapacityError, LinkingDecomposition, normalize, theorem_matrices
from .problem import (BlockProblem, CandidateSolution, FiberType, ProblemValidationError,
                      assemble, e_matrix, evaluate)
from .search import PRUNE_MODULI, ResidueEvaluator, residue_table, run_search, TABLE_LIMIT
from .surgery import SurgeryDiagram, phi_psi

DEFAULT_ENUMERATION_BUDGET = 10**8


class DiskCaseError(ProblemValidationError):
    """Fiber (0, 0): the criterion degenerates, use :func:`disk_case`."""


class ObstructionInapplicable(ValueError):
    """The preconditions of an obstruction rule do not hold for this problem."""


class ReductionError(ValueError):
    pass


# ----------------------------------------------------------------------
# problems

def problem_from_decomposition(d: LinkingDecomposition, f: FiberType) -> BlockProblem:
    """``M0 = S``, ``W = T`` from the normal form of ``d``."""
    if f.is_disk:
        raise DiskCaseError("fiber (0,0) is the disk case; decide it with disk_case(homology)")
    S, T = theorem_matrices(normalize(d))
    return BlockProblem(S, T, f, "theorem")


def problem_from_diagram(d: SurgeryDiagram, f: FiberType) -> BlockProblem:
    """``M0 = Phi``, ``W = Psi`` of the diagram."""
    if f.is_disk:
        raise DiskCaseError("fiber (0,0) is the disk case; decide it with disk_case(homology)")
    phi, psi = phi_psi(d)
    return BlockProblem(phi, psi, f, "surgery")


def disk_case(H: AbelianGroupData) -> bool:
    """A disk fiber exists exactly for integral homology spheres."""
    return H.is_trivial


# ----------------------------------------------------------------------
# certificates and verdicts

@dataclass(frozen=True)
class ObstructionCertificate:
    """Residues mod ``q`` that the determinant can take; neither ``1`` nor ``q-1`` among them.

    ``kind`` is ``"full-modular"`` (exhaustive enumeration) or
    ``"square-block"`` (the ``±det(W)·square`` rule, with ``det_w`` set).
    """

    kind: str
    modulus: int
    attainable: tuple[int, ...]
    det_w: int | None = None

    def __post_init__(self):
        q = self.modulus
        object.__setattr__(self, "attainable", tuple(sorted(set(int(r) % q for r in self.attainable))))
        if self.kind not in ("full-modular", "square-block"):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if q < 2:
            raise ValueError("modulus must be at least 2")
        if 1 % q in self.attainable or (q - 1) in self.attainable:
            raise ValueError(f"attainable set {self.attainable} meets ±1 mod {q}: not an obstruction")
        if self.kind == "square-block" and self.det_w is None:
            raise ValueError("square-block certificate needs det W mod q")

    def recheck(self, problem: BlockProblem, budget: int = DEFAULT_ENUMERATION_BUDGET) -> bool:
        """Recompute the attainable set from scratch and compare."""
        try:
            if self.kind == "full-modular":
                again = modular_obstruction(problem, self.modulus, budget, fresh=True)
            else:
                again = square_block_obstruction(problem, self.modulus)
        except (CapacityError, ObstructionInapplicable):
            return False
        return again == self


@dataclass(frozen=True)
class Exists:
    solution: CandidateSolution
    det: int
    kind: str = field(default="exists", init=False)

    def recheck(self, problem: BlockProblem) -> bool:
        try:
            det = evaluate(problem, self.solution)
        except ValueError:
            return False
        return abs(det) == 1 and det == self.det


@dataclass(frozen=True)
class NotExists:
    certificate: ObstructionCertificate
    kind: str = field(default="not-exists", init=False)

    def recheck(self, problem: BlockProblem, budget: int = DEFAULT_ENUMERATION_BUDGET) -> bool:
        return self.certificate.recheck(problem, budget)


@dataclass(frozen=True)
class Unknown:
    """No solution within ``entry_bound`` (or the budget ran out first)."""

    entry_bound: int
    moduli: tuple[int, ...]
    examined: int
    budget_exhausted: bool = False
    shell: int | None = None  # last shell visited: the progress marker
    kind: str = field(default="unknown", init=False)

    def recheck(self, problem: BlockProblem) -> bool:
        return True  # carries no claim


Verdict = Exists | NotExists | Unknown


# ----------------------------------------------------------------------
# obstructions

def attainable_residues(problem: BlockProblem, q: int,
                        budget: int = DEFAULT_ENUMERATION_BUDGET, *, fresh: bool = False) -> frozenset[int]:
    """All residues mod ``q`` of the determinant over every ``(X, Y)`` mod ``q``.

    ``fresh`` bypasses the residue-table cache (used when re-checking).
    """
    if q < 2:
        raise ValueError("modulus must be at least 2")
    v = problem.num_variables
    total = q**v
    if total > budget:
        raise CapacityError(f"{q}^{v} = {total} assignments exceeds the enumeration budget {budget}")
    if total <= TABLE_LIMIT:
        return frozenset(int(r) for r in np.unique(residue_table(problem, q, cache=not fresh)))
    ev = ResidueEvaluator(problem, moduli=())
    seen: set[int] = set()
    powers = q ** np.arange(v - 1, -1, -1, dtype=np.int64)
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        vecs = (idx[:, None] // powers[None, :]) % q
        seen.update(int(r) for r in np.unique(ev.det_mod(vecs, q)))
        if len(seen) == q:
            break
    return frozenset(seen)


def modular_obstruction(problem: BlockProblem, q: int, budget: int = DEFAULT_ENUMERATION_BUDGET, *,
                        fresh: bool = False) -> ObstructionCertificate | None:
    """Certificate iff neither ``1`` nor ``q-1`` is an attainable determinant mod ``q``.

    Raises :class:`CapacityError` when ``q**v`` exceeds ``budget``.
    """
    att = attainable_residues(problem, q, budget, fresh=fresh)
    if 1 % q in att or (q - 1) in att:
        return None
    return ObstructionCertificate("full-modular", q, tuple(att))


def square_residues(q: int) -> frozenset[int]:
    return frozenset(x * x % q for x in range(q))


def square_block_obstruction(problem: BlockProblem, q: int) -> ObstructionCertificate | None:
    """Rule for square ``X`` and ``M0 ≡ 0 (mod q)``.

    Then the assembled matrix is ``[[0, W X], [X^t, *]]`` mod ``q`` and its
    determinant is ``±det(W)·det(X)^2``, so only ``±det(W)·(square)``
    residues occur.  Raises :class:`ObstructionInapplicable` otherwise.
    """
    if q < 2:
        raise ValueError("modulus must be at least 2")
    if problem.m != problem.d:
        raise ObstructionInapplicable(f"X is {problem.m}x{problem.d}, not square")
    if any(x % q for x in problem.M0.entries):
        raise ObstructionInapplicable(f"M0 has entries that are nonzero mod {q}")
    dw = determinant(problem.W) % q
    att = {s * dw % q for s in square_residues(q)} | {-s * dw % q for s in square_residues(q)}
    if 1 % q in att or (q - 1) in att:
        return None
    return ObstructionCertificate("square-block", q, tuple(att), det_w=dw)


# ----------------------------------------------------------------------
# the decision procedure

def search(problem: BlockProblem, entry_bound: int, budget: int | None = None, *,
           moduli=PRUNE_MODULI, workers: int = 1) -> Exists | Unknown:
    """Bounded search; the lexicographically least solution of the first shell that has one."""
    out = run_search(problem, entry_bound, budget, moduli=moduli, workers=workers)
    if out.solution is not None:
        return Exists(out.solution, out.det)
    return Unknown(entry_bound, tuple(moduli), out.examined, out.budget_exhausted, out.shell)


def obstruction_moduli(problem: BlockProblem, base=(8, 9)) -> tuple[int, ...]:
    """``base`` plus the primes above 3 dividing the torsion of ``coker(M0)``, i.e. of ``H_1``."""
    primes = sorted({p for n in cokernel(problem.M0).invariant_factors for p, _ in factorize(n) if p > 3})
    return tuple(base) + tuple(primes)


def find_obstruction(problem: BlockProblem, moduli=None,
                     budget: int = DEFAULT_ENUMERATION_BUDGET) -> ObstructionCertificate | None:
    """Cheapest certificate available: square-block rule first, then full enumeration.

    ``moduli`` defaults to :func:`obstruction_moduli`; a modulus whose
    enumeration would exceed ``budget`` is skipped.
    """
    if moduli is None:
        moduli = obstruction_moduli(problem)
    for q in moduli:
        try:
            cert = square_block_obstruction(problem, q)
        except ObstructionInapplicable:
            continue
        if cert is not None:
            return cert
    for q in moduli:
        if q**problem.num_variables > budget:
            continue
        cert = modular_obstruction(problem, q, budget)
        if cert is not None:
            return cert
    return None


def decide(problem: BlockProblem, entry_bound: int = 6, budget: int | None = None, *,
           obstruction_moduli=None, enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
           moduli=PRUNE_MODULI, workers: int = 1) -> Verdict:
    """Obstructions first, then bounded search."""
    cert = find_obstruction(problem, obstruction_moduli, enumeration_budget)
    if cert is not None:
        return NotExists(cert)
    return search(problem, entry_bound, budget, moduli=moduli, workers=workers)


# ----------------------------------------------------------------------
# removing a split 0-framed unknot

def reduced_fiber(f: FiberType) -> FiberType:
    """``(1, 0) -> (0, 1)`` and ``(0, n) -> (0, n - 1)`` for ``n >= 2``."""
    if (f.g, f.n) == (1, 0):
        return FiberType(0, 1)
    if f.g == 0 and f.n >= 2:
        return FiberType(0, f.n - 1)
    raise ReductionError(f"reduction is defined for fibers (1,0) and (0,n), n >= 2; got ({f.g},{f.n})")


def stabilization_reduce(problem: BlockProblem, sol: CandidateSolution) -> tuple[BlockProblem, CandidateSolution]:
    """Turn a solution for ``(S^2 x S^1) # M`` into one for ``M`` on a smaller fiber.

    ``problem`` must come from a diagram whose first component is a
    0-framed unknot split from the rest, so row and column 1 of ``M0``
    vanish and ``W`` has ``±1`` in its corner.  Row 1 of the assembled
    matrix is then ``±(0, x)`` with ``x`` the first row of ``X``.
    Congruences ``C_i += t C_j``, ``R_i += t R_j`` on the fiber indices run
    Euclid on ``x`` until one entry ``±1`` remains; deleting that index
    and index 1 leaves a matrix of the same block shape with determinant
    ``±1`` for the remaining diagram.
    """
    fiber = problem.fiber
    target = reduced_fiber(fiber)
    m, d = problem.m, problem.d
    if m < 1:
        raise ReductionError("problem has no components to remove")
    M0, W = problem.M0, problem.W
    if any(M0[0, j] or M0[j, 0] for j in range(m)):
        raise ReductionError("first component is not a split 0-framed unknot (M0 row/column 1 nonzero)")
    if abs(W[0, 0]) != 1 or any(W[0, j] or W[j, 0] for j in range(1, m)):
        raise ReductionError("first component must have slope 0/±1 and W must split off its corner")
    det0 = evaluate(problem, sol)
    if abs(det0) != 1:
        raise ReductionError(f"input candidate does not verify (det {det0})")

    A = [list(r) for r in assemble(problem, sol).rows()]

    def congruence(i: int, j: int, t: int):
        # fiber index i += t * fiber index j, on columns and rows
        ci, cj = m + i, m + j
        for r in A:
            r[ci] += t * r[cj]
        A[ci] = [a + t * b for a, b in zip(A[ci], A[cj])]

    def row1():
        return [A[0][m + k] for k in range(d)]

    while True:
        x = row1()
        nz = [k for k in range(d) if x[k]]
        if not nz:
            raise ReductionError("first row of X vanishes; determinant cannot be ±1")
        j = min(nz, key=lambda k: (abs(x[k]), k))
        if len(nz) == 1:
            break
        for i in nz:
            if i != j:
                congruence(i, j, -(x[i] // x[j]))
    if abs(x[j]) != 1:
        raise ReductionError(f"gcd of the first row of X is {abs(x[j])}")

    keep = [k for k in range(m + d) if k not in (0, m + j)]
    R = [[A[a][b] for b in keep] for a in keep]
    m2, d2 = m - 1, d - 1
    M0r = IntMatrix.from_rows([r[:m2] for r in R[:m2]], ncols=m2)
    Wr = W.submatrix(range(1, m), range(1, m))
    Xr = IntMatrix.from_rows([r[:m2] for r in R[m2:]], ncols=m2).T if m2 else IntMatrix.zeros(0, d2)
    Z = IntMatrix.from_rows([r[m2:] for r in R[m2:]], ncols=d2)
    reduced = BlockProblem(M0r, Wr, target, "reduced")
    out = CandidateSolution(Xr, Z - e_matrix(target))
    if assemble(reduced, out).entries != IntMatrix.from_rows(R, ncols=m2 + d2).entries:
        raise ReductionError("reduced matrix lost its block shape")  # not expected: W splits
    return reduced, out
