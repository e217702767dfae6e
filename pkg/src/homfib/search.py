"""Residue evaluation and bounded search for the block determinant equation.

Candidates are flat integer vectors: ``X`` row-major, then the upper
triangle of ``Y`` row-major (see :meth:`CandidateSolution.from_vector`).
The search visits max-norm shells ``s = 0, 1, ..., bound`` and, inside a
shell, vectors in lexicographic order of ``[-s, s]^v``; the first vector
whose determinant is exactly ``±1`` is reported.  The order is fixed, so
the answer does not depend on how many workers share the work.

Each shell is cut into batches by a lexicographic prefix; a batch is the
prefix followed by every admissible suffix.  A batch is filtered by the
determinant modulo the pruning moduli (8 and 9 by default), then by two
31-bit primes, and only the survivors are evaluated exactly.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import determinant
from .modular import batch_det_mod
from .problem import BlockProblem, CandidateSolution, assemble

log = logging.getLogger(__name__)

PRUNE_MODULI = (8, 9)
TABLE_LIMIT = 1 << 23
BATCH_LIMIT = 1 << 17
_FILTER_PRIMES = (2147483647, 2147483629)


class ResidueEvaluator:
    """Determinants of assembled matrices modulo ``q`` for batches of candidates.

    When ``q**v`` is at most ``table_limit`` the full residue table for
    ``q`` is computed once and candidates are answered by lookup.
    """

    def __init__(self, problem: BlockProblem, moduli=PRUNE_MODULI, table_limit: int = TABLE_LIMIT,
                 tables: dict | None = None, volume: int | None = None):
        self.problem = problem
        self.m, self.d = problem.m, problem.d
        self.v = problem.num_variables
        self.n = self.m + self.d
        self.moduli = tuple(moduli)
        self._tri = [(i, j) for i in range(self.d) for j in range(i, self.d)]
        self.tables: dict[int, np.ndarray] = dict(tables or {})
        for q in self.moduli:
            size = q**self.v
            # a table pays off once the search would touch about as many candidates
            if q not in self.tables and size <= table_limit and (volume is None or volume >= size // 4):
                self.tables[q] = residue_table(problem, q)

    def matrices_mod(self, vecs: np.ndarray, q: int) -> np.ndarray:
        """Stack of assembled matrices reduced mod ``q``."""
        vecs = np.asarray(vecs, dtype=np.int64) % q
        N = vecs.shape[0]
        m, d, n = self.m, self.d, self.n
        out = np.zeros((N, n, n), dtype=np.int64)
        M0 = np.array([[x % q for x in r] for r in self.problem.M0.rows()], dtype=np.int64).reshape(m, m)
        W = np.array([[x % q for x in r] for r in self.problem.W.rows()], dtype=np.int64).reshape(m, m)
        out[:, :m, :m] = M0
        X = vecs[:, :m * d].reshape(N, m, d)
        WX = np.zeros((N, m, d), dtype=np.int64)
        for j in range(m):
            WX = (WX + W[:, j][None, :, None] * X[:, j, :][:, None, :]) % q
        out[:, :m, m:] = WX
        out[:, m:, :m] = X.transpose(0, 2, 1)
        for col, (i, j) in enumerate(self._tri):
            y = vecs[:, m * d + col]
            out[:, m + i, m + j] = y
            out[:, m + j, m + i] = y
        g = self.problem.fiber.g
        for i in range(g):
            out[:, m + 2 * i, m + 2 * i + 1] = (out[:, m + 2 * i, m + 2 * i + 1] + 1) % q
        return out

    def det_mod(self, vecs: np.ndarray, q: int) -> np.ndarray:
        if q in self.tables:
            return self.tables[q][self.table_index(vecs, q)]
        return batch_det_mod(self.matrices_mod(vecs, q), q)

    def table_index(self, vecs: np.ndarray, q: int) -> np.ndarray:
        r = np.asarray(vecs, dtype=np.int64) % q
        idx = np.zeros(r.shape[0], dtype=np.int64)
        for i in range(self.v):
            idx = idx * q + r[:, i]
        return idx

    def residue_table(self, q: int) -> np.ndarray:
        return residue_table(self.problem, q)

    def survivors(self, vecs: np.ndarray) -> np.ndarray:
        """Indices (ascending) of candidates whose determinant can still be ``±1``."""
        alive = np.arange(vecs.shape[0])
        for q in self.moduli:
            if not len(alive):
                break
            r = self.det_mod(vecs[alive], q)
            alive = alive[(r == 1 % q) | (r == q - 1)]
        sign = None
        for P in _FILTER_PRIMES:
            if not len(alive):
                break
            r = batch_det_mod(self.matrices_mod(vecs[alive], P), P)
            plus, minus = r == 1, r == P - 1
            if sign is None:
                keep = plus | minus
                sign = np.where(plus, 1, -1)[keep]
            else:
                keep = np.where(sign == 1, plus, minus)
                sign = sign[keep]
            alive = alive[keep]
        return alive

    def hopeless(self) -> bool:
        """True if some residue table contains no unit ``±1`` at all."""
        return any(not np.any((t == 1 % q) | (t == q - 1)) for q, t in self.tables.items())


_TABLES: dict[tuple[str, int], np.ndarray] = {}
_TABLE_CACHE_SIZE = 16


def residue_table(problem: BlockProblem, q: int, chunk: int = 1 << 16, *, cache: bool = True) -> np.ndarray:
    """Determinant mod ``q`` for every residue vector of ``problem``, indexed lexicographically.

    Tables are cached per (problem fingerprint, q): the modular obstruction
    and the search pruning ask for the same enumeration.
    """
    key = (problem.fingerprint(), q)
    if cache and key in _TABLES:
        return _TABLES[key]
    ev = ResidueEvaluator(problem, moduli=())
    total = q**ev.v
    out = np.empty(total, dtype=np.int64)
    powers = q ** np.arange(ev.v - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        vecs = (idx[:, None] // powers[None, :]) % q
        out[start:start + len(idx)] = batch_det_mod(ev.matrices_mod(vecs, q), q)
    out = out.astype(np.int32)
    if len(_TABLES) >= _TABLE_CACHE_SIZE:
        _TABLES.pop(next(iter(_TABLES)))
    _TABLES[key] = out
    return out


# ----------------------------------------------------------------------
# shell enumeration

def _split(v: int, side: int, limit: int = BATCH_LIMIT) -> int:
    """Number of trailing variables enumerated as one vectorised batch."""
    u, size = 0, 1
    while u < v and size * side <= limit:
        size *= side
        u += 1
    return max(u, 1) if v else 0


def _suffix_grid(u: int, s: int) -> np.ndarray:
    side = 2 * s + 1
    if u == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(side**u, dtype=np.int64)
    powers = side ** np.arange(u - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % side - s


def shell_batches(v: int, s: int):
    """Yield ``(prefix, suffix_rows)`` covering shell ``s`` in lexicographic order."""
    side = 2 * s + 1
    u = _split(v, side)
    grid = _suffix_grid(u, s)
    on_shell = np.abs(grid).max(axis=1, initial=0) == s if u else np.zeros(1, dtype=bool)
    for prefix in itertools.product(range(-s, s + 1), repeat=v - u):
        if s == 0 or (prefix and max(abs(x) for x in prefix) == s):
            yield prefix, grid
        elif on_shell.any():
            yield prefix, grid[on_shell]


def shell_size(v: int, s: int) -> int:
    return (2 * s + 1) ** v - (2 * s - 1) ** v if s else 1


# ----------------------------------------------------------------------
# the search proper

@dataclass(frozen=True)
class BatchResult:
    count: int
    hit: int | None = None  # position of first solution within the batch
    vector: tuple[int, ...] | None = None
    det: int | None = None


_WORKER: dict = {}


def _init_worker(problem, moduli, tables):
    # the parent already decided which tables pay off; never build more here
    _WORKER["ev"] = ResidueEvaluator(problem, moduli, tables=tables, volume=0)


def _run_batch(prefix, suffix, limit=None) -> BatchResult:
    ev: ResidueEvaluator = _WORKER["ev"]
    return evaluate_batch(ev, prefix, suffix, limit)


def evaluate_batch(ev: ResidueEvaluator, prefix, suffix: np.ndarray, limit: int | None = None) -> BatchResult:
    if limit is not None:
        suffix = suffix[:limit]
    N = suffix.shape[0]
    if N == 0:
        return BatchResult(0)
    vecs = np.empty((N, ev.v), dtype=np.int64)
    vecs[:, :len(prefix)] = np.asarray(prefix, dtype=np.int64)
    vecs[:, len(prefix):] = suffix
    for pos in ev.survivors(vecs):
        cand = CandidateSolution.from_vector(vecs[pos].tolist(), ev.m, ev.d)
        det = determinant(assemble(ev.problem, cand))
        if abs(det) == 1:
            return BatchResult(N, int(pos), tuple(int(x) for x in vecs[pos]), det)
    return BatchResult(N)


@dataclass(frozen=True)
class SearchOutcome:
    solution: CandidateSolution | None
    det: int | None
    examined: int
    shell: int
    budget_exhausted: bool
    pruned_by_tables: bool = False


def _table_candidates(ev: ResidueEvaluator, limit: int = TABLE_LIMIT) -> list[int]:
    return [q for q in ev.moduli if q not in ev.tables and q**ev.v <= limit]


def _adopt_tables(ev: ResidueEvaluator, examined: int) -> bool:
    """Build the residue tables that have become cheaper than direct evaluation.

    Returns True when a table shows that no candidate can have a unit
    determinant, so the rest of the search is pruned wholesale.
    """
    built = False
    for q in _table_candidates(ev):
        if examined >= q**ev.v // 4:
            ev.tables[q] = residue_table(ev.problem, q)
            built = True
    return built and ev.hopeless()


def run_search(problem: BlockProblem, entry_bound: int, budget: int | None = None, *,
               moduli=PRUNE_MODULI, workers: int = 1) -> SearchOutcome:
    """Lexicographically first solution within ``|entries| <= entry_bound``.

    Pruning is sound, so whether a residue is answered by table lookup or
    by direct evaluation only changes the running time, never the result.
    """
    if entry_bound < 0:
        raise ValueError("entry bound must be non-negative")
    v = problem.num_variables
    total = (2 * entry_bound + 1) ** v

    def pruned_out() -> SearchOutcome:
        if budget is not None and total > budget:
            return SearchOutcome(None, None, budget, entry_bound, True, True)
        return SearchOutcome(None, None, total, entry_bound, False, True)

    pool = None
    if workers > 1:
        # workers receive their tables once, up front
        ev = ResidueEvaluator(problem, moduli, volume=total)
        if ev.hopeless():
            return pruned_out()
        pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                   initargs=(problem, ev.moduli, ev.tables))
    else:
        ev = ResidueEvaluator(problem, moduli, tables=_cached_tables(problem, moduli), volume=0)
        if ev.hopeless():
            return pruned_out()
    examined = 0
    try:
        for s in range(entry_bound + 1):
            log.debug("shell %d (%d candidates)", s, shell_size(v, s))
            batches = shell_batches(v, s)
            while True:
                wave = list(itertools.islice(batches, max(1, workers) * 4))
                if not wave:
                    break
                if pool is None:
                    results = (evaluate_batch(ev, p, g) for p, g in wave)
                else:
                    results = pool.map(_run_batch, [p for p, _ in wave], [g for _, g in wave])
                for (prefix, grid), res in zip(wave, results):
                    room = None if budget is None else budget - examined
                    if room is not None and res.count > room:
                        # re-run the tail-truncated batch so the budget cut is exact
                        res = evaluate_batch(ev, prefix, grid, room)
                        examined += res.count
                        if res.hit is not None:
                            sol = CandidateSolution.from_vector(res.vector, ev.m, ev.d)
                            return SearchOutcome(sol, res.det, examined - res.count + res.hit + 1, s, False)
                        return SearchOutcome(None, None, examined, s, True)
                    if res.hit is not None:
                        sol = CandidateSolution.from_vector(res.vector, ev.m, ev.d)
                        return SearchOutcome(sol, res.det, examined + res.hit + 1, s, False)
                    examined += res.count
                if pool is None and _adopt_tables(ev, examined):
                    return pruned_out()
        return SearchOutcome(None, None, examined, entry_bound, False)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)


def _cached_tables(problem: BlockProblem, moduli) -> dict[int, np.ndarray]:
    fp = problem.fingerprint()
    return {q: _TABLES[(fp, q)] for q in moduli if (fp, q) in _TABLES}
