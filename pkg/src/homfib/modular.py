"""Batched determinants modulo small integers.

Enumeration-heavy code (modular obstructions, pruning inside the search)
needs determinants of millions of small matrices modulo ``q``.  Those are
computed here on ``int64`` numpy stacks.  Every value is first reduced
into ``[0, q)`` with ``q < 2**31``, so products stay below ``2**62`` and
nothing overflows; this is residue arithmetic, not a fixed-width shortcut
for exact integers.

For a prime power ``q = p**e`` elimination runs in the local ring
``Z/p^e``: the pivot is the entry of least ``p``-adic valuation, which
divides every other entry of its column.  Composite moduli are split into
prime powers and recombined by CRT.  Matrices up to 5x5 skip elimination
and use a division-free subset expansion, which is faster at that size.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

MAX_MODULUS = 2**31 - 1


def factorize(q: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= q:
        e = 0
        while q % d == 0:
            q //= d
            e += 1
        if e:
            out.append((d, e))
        d += 1
    if q > 1:
        out.append((q, 1))
    return out


@lru_cache(maxsize=64)
def _tables(p: int, e: int):
    """Valuation and unit-inverse lookup tables for ``Z/p^e`` (small ``q`` only)."""
    q = p**e
    val = np.full(q, e, dtype=np.int64)
    inv = np.zeros(q, dtype=np.int64)
    for r in range(1, q):
        v, u = 0, r
        while u % p == 0:
            u //= p
            v += 1
        val[r] = v
        inv[r] = pow(u, -1, q)
    return val, inv


def _powmod(base: np.ndarray, exp: int, q: int) -> np.ndarray:
    result = np.ones_like(base)
    b = base % q
    while exp:
        if exp & 1:
            result = result * b % q
        b = b * b % q
        exp >>= 1
    return result


def _det_prime_power(a: np.ndarray, p: int, e: int) -> np.ndarray:
    q = p**e
    N, n, _ = a.shape
    a = a % q
    det = np.ones(N, dtype=np.int64)
    if n == 0:
        return det % q
    use_tables = q <= 1 << 16
    if use_tables:
        val_t, inv_t = _tables(p, e)
    rows = np.arange(N)
    for k in range(n):
        col = a[:, k:, k]
        if use_tables:
            vals = val_t[col]
        else:
            vals = np.where(col == 0, e, 0)
        piv = np.argmin(vals, axis=1) + k
        swap = piv != k
        if swap.any():
            rk = a[rows, k].copy()
            a[rows, k] = a[rows, piv]
            a[rows, piv] = rk
            det = np.where(swap, (q - det) % q, det)
        pv = a[:, k, k]
        det = det * pv % q
        if k == n - 1:
            break
        if use_tables:
            v = val_t[pv]
            uinv = inv_t[pv]
            scale = np.power(p, np.minimum(v, e - 1)).astype(np.int64)
        else:
            v = np.where(pv == 0, 1, 0)
            uinv = _powmod(pv, q - 2, q)
            scale = np.ones(N, dtype=np.int64)
        dead = v >= e
        # entries below the pivot are divisible by p**v; divide out exactly
        t = a[:, k + 1:, k] // scale[:, None]
        mult = t * uinv[:, None] % q
        mult[dead] = 0
        a[:, k + 1:, :] = (a[:, k + 1:, :] - mult[:, :, None] * a[:, k:k + 1, :]) % q
    return det % q


def _det_laplace(a: np.ndarray, q: int) -> np.ndarray:
    """Division-free expansion: minors of the leading rows over every column subset."""
    N, n, _ = a.shape
    a = a % q
    minors = {0: np.ones(N, dtype=np.int64)}
    for k in range(n):
        nxt = {}
        for cols in itertools.combinations(range(n), k + 1):
            mask = sum(1 << c for c in cols)
            acc = np.zeros(N, dtype=np.int64)
            for pos, c in enumerate(cols):
                term = a[:, k, c] * minors[mask & ~(1 << c)] % q
                acc = acc - term if (k + pos) % 2 else acc + term
            nxt[mask] = acc % q
        minors = nxt
    return minors[(1 << n) - 1] % q


LAPLACE_MAX = 5


def batch_det_mod(mats, q: int) -> np.ndarray:
    """Determinants modulo ``q`` of a stack of square matrices ``(N, n, n)``."""
    if not 1 <= q <= MAX_MODULUS:
        raise ValueError(f"modulus {q} outside supported range")
    a = np.asarray(mats, dtype=np.int64)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {a.shape}")
    if q == 1:
        return np.zeros(a.shape[0], dtype=np.int64)
    if a.shape[1] <= LAPLACE_MAX:
        return _det_laplace(a, q)
    result = np.zeros(a.shape[0], dtype=np.int64)
    modulus = 1
    for p, e in factorize(q):
        pe = p**e
        r = _det_prime_power(a.copy(), p, e)
        # CRT combine: x = result (mod modulus), x = r (mod pe)
        if modulus == 1:
            result = r
        else:
            inv = pow(modulus, -1, pe)
            t = (r - result % pe) % pe * inv % pe
            result = result + modulus * t
        modulus *= pe
    return result % q
