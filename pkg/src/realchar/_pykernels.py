"""Pure numpy implementation of the mean-square kernels.

Same interface as the compiled module. A block of d values is handled at
once: character values at odd primes come from per-prime tables of (8r/p)
(or a vectorized binary Jacobi when the tables would be too large), and
composites are filled level by level in the number of prime factors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from ._tables import chi8_tables

BACKEND = "python"


def jacobi(a: int, n: int) -> int:
    if n <= 0 or not n & 1:
        raise ValueError("jacobi symbol needs an odd positive modulus")
    a %= n
    k = 1
    while a:
        while not a & 1:
            a >>= 1
            if n & 7 in (3, 5):
                k = -k
        a, n = n, a
        if a & 3 == 3 and n & 3 == 3:
            k = -k
        a %= n
    return k if n == 1 else 0


def _jacobi_grid(a: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Elementwise Jacobi symbol (a/n) for broadcastable int64 arrays, n odd."""
    a, n = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(n, dtype=np.int64))
    a = a % n
    n = n.copy()
    k = np.ones(a.shape, dtype=np.int8)
    active = a != 0
    while active.any():
        even = active & ((a & 1) == 0)
        while even.any():
            a[even] >>= 1
            r = n & 7
            flip = even & ((r == 3) | (r == 5))
            k[flip] = -k[flip]
            even = active & ((a & 1) == 0)
        a_new = np.where(active, n, a)
        n = np.where(active, a, n)
        a = a_new
        flip = active & ((a & 3) == 3) & ((n & 3) == 3)
        k[flip] = -k[flip]
        a = np.where(active, a % np.where(active, n, 1), a)
        active = a != 0
    return np.where(n == 1, k, 0).astype(np.int8)


class _Plan:
    """Index bookkeeping for odd n <= n_max, shared by all blocks."""

    def __init__(self, n_max: int, lpf: np.ndarray):
        self.n_max = n_max
        odd = np.arange(1, n_max + 1, 2, dtype=np.int64)
        self.size = odd.size
        lp = lpf[odd].astype(np.int64) if odd.size else odd
        is_prime = (lp == odd) & (odd > 1)
        self.primes = odd[is_prime]
        sign2 = np.where(np.isin(self.primes & 7, (3, 5)), -1, 1).astype(np.int8)
        self.sign2 = sign2

        # Omega(n) level of each odd n; cofactor n / lpf(n) sits one level lower
        omega = np.zeros(n_max + 1, dtype=np.int16)
        for n in odd[1:]:
            if lp[(n - 1) // 2] != n:
                omega[n] = omega[n // lp[(n - 1) // 2]] + 1
        comp = odd[(~is_prime) & (odd > 1)]
        comp_lp = lpf[comp].astype(np.int64)
        levels = []
        if comp.size:
            lv = omega[comp]
            for level in range(1, int(lv.max()) + 1):
                sel = lv == level
                levels.append(((comp[sel] - 1) // 2, (comp_lp[sel] - 1) // 2, (comp[sel] // comp_lp[sel] - 1) // 2))
        self.levels = levels
        self.prime_cols = (self.primes - 1) // 2

        self.tables = chi8_tables(n_max, lpf)

    def chi_block(self, ds: np.ndarray) -> np.ndarray:
        """(8d/n) at odd n <= n_max for each d, shape (len(ds), size)."""
        chi = np.zeros((ds.size, self.size), dtype=np.int8)
        if self.size == 0:
            return chi
        chi[:, 0] = 1
        if self.primes.size:
            if self.tables is not None:
                flat, offsets = self.tables
                chi[:, self.prime_cols] = flat[offsets[self.primes][None, :] + ds[:, None] % self.primes[None, :]]
            else:
                vals = _jacobi_grid(ds[:, None], self.primes[None, :])
                chi[:, self.prime_cols] = vals * self.sign2[None, :]
        for cols, pcols, ccols in self.levels:
            chi[:, cols] = chi[:, pcols] * chi[:, ccols]
        return chi


@lru_cache(maxsize=4)
def _plan(n_max: int, lpf_bytes: bytes) -> _Plan:
    lpf = np.frombuffer(lpf_bytes, dtype=np.int32)
    return _Plan(n_max, lpf)


def _get_plan(n_max: int, lpf: np.ndarray) -> _Plan:
    head = np.ascontiguousarray(lpf[: n_max + 1], dtype=np.int32)
    return _plan(n_max, head.tobytes())


def chi_table(d: int, n_max: int, lpf: np.ndarray) -> np.ndarray:
    out = np.zeros(n_max + 1, dtype=np.int8)
    plan = _get_plan(n_max, lpf)
    row = plan.chi_block(np.array([d], dtype=np.int64))[0]
    out[1::2] = row
    return out


def _inner_block(plan: _Plan, ds: np.ndarray, phi_odd: np.ndarray) -> np.ndarray:
    chi = plan.chi_block(ds)
    return (chi * phi_odd[None, :]).sum(axis=1)


def inner_sums(ds, phi, lpf) -> np.ndarray:
    ds = np.ascontiguousarray(ds, dtype=np.int64)
    phi = np.asarray(phi, dtype=np.float64)
    n_max = phi.size - 1
    plan = _get_plan(n_max, lpf)
    phi_odd = phi[1::2]
    out = np.empty(ds.size)
    step = 256
    for lo in range(0, ds.size, step):
        out[lo : lo + step] = _inner_block(plan, ds[lo : lo + step], phi_odd)
    return out


def block_partials(ds, wts, phi, lpf, block: int, threads: int):
    ds = np.ascontiguousarray(ds, dtype=np.int64)
    wts = np.asarray(wts, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    n_max = phi.size - 1
    plan = _get_plan(n_max, lpf)
    phi_odd = phi[1::2]
    nblocks = (ds.size + block - 1) // block

    def run(b: int):
        sl = slice(b * block, (b + 1) * block)
        inner = _inner_block(plan, ds[sl], phi_odd)
        peak = float(np.max(np.abs(inner))) if inner.size else 0.0
        return math.fsum((wts[sl] * inner * inner).tolist()), peak

    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(nblocks)))
    else:
        results = [run(b) for b in range(nblocks)]
    partials = np.array([r[0] for r in results], dtype=np.float64)
    peaks = np.array([r[1] for r in results], dtype=np.float64)
    return partials, peaks
