"""Exact integer arithmetic: Kronecker symbols, sieves and factorization.

Everything else in the package is built on top of these helpers. The sieve
tables are plain numpy arrays and are treated as read-only once built, so
they can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

import numpy as np

# bytes per sieve entry: int8 mobius + int32 lpf + 1/8 packed bit
_BYTES_PER_ENTRY = 5.125
DEFAULT_MEMORY_BUDGET = 1 << 30


class SieveBudgetError(MemoryError):
    """Requested sieve would not fit in the configured memory budget."""


def kronecker(m: int, n: int) -> int:
    """Kronecker symbol (m/n).

    Binary reciprocity algorithm; no factorization is performed. Follows
    the usual extension to n = 0, negative n and even n.
    """
    m = int(m)
    n = int(n)
    if n == 0:
        if m == 0:
            raise ValueError("kronecker(0, 0) is undefined")
        return 1 if m in (1, -1) else 0
    if not (m & 1) and not (n & 1):
        return 0

    v = (n & -n).bit_length() - 1
    n >>= v
    # (m/2)^v, with (m/2) = 1 for m = +-1 mod 8 and -1 for m = +-3 mod 8
    k = 1
    if v & 1 and (m & 7) in (3, 5):
        k = -1
    if n < 0:
        n = -n
        if m < 0:
            k = -k

    # n odd positive from here: Jacobi symbol
    m %= n
    while m:
        v = (m & -m).bit_length() - 1
        m >>= v
        if v & 1 and (n & 7) in (3, 5):
            k = -k
        if m & n & 2:
            k = -k
        m, n = n % m, m
    return k if n == 1 else 0


def jacobi(m: int, n: int) -> int:
    if n <= 0 or not n & 1:
        raise ValueError("jacobi symbol needs an odd positive modulus")
    return kronecker(m, n)


@dataclass(frozen=True)
class SieveTables:
    """Read-only arithmetic tables for 0..limit.

    Attributes:
        limit: largest index covered.
        mobius: int8 array, ``mobius[n] = mu(n)``.
        least_prime_factor: int32 array; ``least_prime_factor[n]`` for
            n >= 2, zero at 0 and 1.
        squarefree_odd_bits: packed (little bit order) indicator of odd
            square-free n. Use :meth:`squarefree_odd` for lookups.
    """

    limit: int
    mobius: np.ndarray
    least_prime_factor: np.ndarray
    squarefree_odd_bits: np.ndarray

    def is_squarefree_odd(self, n: int) -> bool:
        return bool((self.squarefree_odd_bits[n >> 3] >> (n & 7)) & 1)

    @property
    def squarefree_odd(self) -> np.ndarray:
        """Unpacked boolean indicator array (allocates)."""
        bits = np.unpackbits(self.squarefree_odd_bits, bitorder="little")
        return bits[: self.limit + 1].astype(bool)

    def primes(self, upto: int | None = None, start: int = 2) -> np.ndarray:
        hi = self.limit if upto is None else min(upto, self.limit)
        idx = np.arange(start, hi + 1)
        return idx[self.least_prime_factor[start : hi + 1] == idx]

    def squarefree_odd_upto(self, upto: int) -> np.ndarray:
        """Odd square-free integers in [1, upto] as int64."""
        hi = min(upto, self.limit)
        sf = self.squarefree_odd[: hi + 1]
        return np.flatnonzero(sf).astype(np.int64)


def build_sieves(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SieveTables:
    """Build Mobius, least-prime-factor and odd square-free tables up to ``limit``."""
    limit = int(limit)
    if limit < 2:
        raise ValueError("sieve limit must be at least 2")
    if limit * _BYTES_PER_ENTRY > memory_budget:
        raise SieveBudgetError(
            f"sieve up to {limit} needs ~{int(limit * _BYTES_PER_ENTRY)} bytes, "
            f"budget is {memory_budget}"
        )

    lpf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, isqrt(limit) + 1):
        if lpf[p]:
            continue
        seg = lpf[p * p :: p]
        seg[seg == 0] = p
    idx = np.arange(limit + 1, dtype=np.int32)
    unset = lpf == 0
    unset[:2] = False
    lpf[unset] = idx[unset]

    mobius = np.ones(limit + 1, dtype=np.int8)
    mobius[0] = 0
    primes = np.flatnonzero(lpf == idx)
    primes = primes[primes >= 2]
    for p in primes:
        p = int(p)
        mobius[p::p] *= -1
        if p * p <= limit:
            mobius[p * p :: p * p] = 0

    sf_odd = mobius != 0
    sf_odd[0::2] = False
    bits = np.packbits(sf_odd, bitorder="little")
    for arr in (mobius, lpf, bits):
        arr.setflags(write=False)
    return SieveTables(limit, mobius, lpf, bits)


def factorize(n: int, tables: SieveTables | None = None) -> list[tuple[int, int]]:
    """Prime factorization of ``n`` as increasing ``(prime, exponent)`` pairs.

    Uses the least-prime-factor table while ``n`` is inside it and falls
    back to trial division beyond.
    """
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    out: list[tuple[int, int]] = []

    def push(p: int) -> None:
        if out and out[-1][0] == p:
            out[-1] = (p, out[-1][1] + 1)
        else:
            out.append((p, 1))

    p = 2
    while n > 1:
        if tables is not None and n <= tables.limit:
            q = int(tables.least_prime_factor[n])
            push(q)
            n //= q
        elif p * p > n:
            push(n)
            break
        elif n % p == 0:
            push(p)
            n //= p
        else:
            p += 1 if p == 2 else 2
    return out


def is_squarefree(n: int) -> bool:
    """Trial-division square-free test (independent of any sieve)."""
    n = int(n)
    if n < 1:
        raise ValueError("is_squarefree needs a positive integer")
    if n % 4 == 0:
        return False
    if n % 2 == 0:
        n //= 2
    p = 3
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return False
        p += 2
    return True


def euler_phi(n: int, tables: SieveTables | None = None) -> int:
    phi = n
    for p, _ in factorize(n, tables):
        phi -= phi // p
    return phi


def is_odd_square(k: int) -> bool:
    r = isqrt(k)
    return k > 0 and k & 1 == 1 and r * r == k
