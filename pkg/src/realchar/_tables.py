"""Per-prime tables of n -> (8r/p), shared by both kernel backends."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# tables are used while sum(p) stays below this many bytes
TABLE_BUDGET = 1 << 28


@lru_cache(maxsize=4)
def _build(n_max: int, lpf_bytes: bytes):
    lpf = np.frombuffer(lpf_bytes, dtype=np.int32)
    idx = np.arange(3, n_max + 1, 2)
    primes = idx[lpf[idx] == idx].astype(np.int64)
    if primes.size == 0 or int(primes.sum()) > TABLE_BUDGET:
        return None
    starts = np.concatenate(([0], np.cumsum(primes)[:-1]))
    flat = np.empty(int(primes.sum()), dtype=np.int8)
    for p, off in zip(primes.tolist(), starts.tolist()):
        sign = -1 if p & 7 in (3, 5) else 1
        row = np.full(p, -sign, dtype=np.int8)
        row[(np.arange(1, p, dtype=np.int64) ** 2) % p] = sign
        row[0] = 0
        flat[off : off + p] = row
    offsets = np.full(n_max + 1, -1, dtype=np.int64)
    offsets[primes] = starts
    flat.setflags(write=False)
    offsets.setflags(write=False)
    return flat, offsets


def chi8_tables(n_max: int, lpf: np.ndarray):
    """``(flat, offsets)`` with ``flat[offsets[p] + r] = (8r/p)`` for odd primes p <= n_max.

    ``offsets[n]`` is -1 unless n is an odd prime. Returns None when the
    tables would exceed ``TABLE_BUDGET`` bytes or there are no odd primes.
    """
    head = np.ascontiguousarray(lpf[: n_max + 1], dtype=np.int32)
    return _build(int(n_max), head.tobytes())
