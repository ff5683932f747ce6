"""Quadratic Gauss-type sums G_m(k) for odd moduli.

Two independent routes:

* :func:`gauss_naive` sums the definition over all residues in complex
  double precision;
* :func:`gauss_exact` multiplies the closed-form prime-power values and
  returns an exact :class:`RadicalValue`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import SieveTables, factorize, kronecker

NAIVE_MAX_K = 10**6


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(g, s)`` with ``n = g*g*s`` and ``s`` square-free."""
    g = 1
    s = 1
    for p, e in factorize(n):
        g *= p ** (e // 2)
        if e & 1:
            s *= p
    return g, s


@dataclass(frozen=True)
class RadicalValue:
    """The real number ``coefficient * sqrt(radicand)``, radicand square-free."""

    coefficient: int
    radicand: int = 1

    def __post_init__(self):
        if self.radicand < 1:
            raise ValueError("radicand must be positive")
        if self.coefficient == 0 and self.radicand != 1:
            object.__setattr__(self, "radicand", 1)

    @classmethod
    def from_parts(cls, coefficient: int, radicand: int) -> "RadicalValue":
        """Normalize an arbitrary positive radicand into canonical form."""
        if coefficient == 0:
            return cls(0, 1)
        g, s = _squarefree_split(radicand)
        return cls(coefficient * g, s)

    def __mul__(self, other: "RadicalValue") -> "RadicalValue":
        if not isinstance(other, RadicalValue):
            return NotImplemented
        if self.coefficient == 0 or other.coefficient == 0:
            return RadicalValue(0, 1)
        # both radicands square-free, so the square part is gcd^2
        g = math.gcd(self.radicand, other.radicand)
        return RadicalValue(
            self.coefficient * other.coefficient * g,
            (self.radicand // g) * (other.radicand // g),
        )

    def __neg__(self) -> "RadicalValue":
        return RadicalValue(-self.coefficient, self.radicand)

    def __float__(self) -> float:
        return self.coefficient * math.sqrt(self.radicand)

    def __bool__(self) -> bool:
        return self.coefficient != 0

    def squared(self) -> int:
        return self.coefficient * self.coefficient * self.radicand

    def __repr__(self) -> str:
        if self.radicand == 1:
            return f"RadicalValue({self.coefficient})"
        return f"RadicalValue({self.coefficient}*sqrt({self.radicand}))"


ONE = RadicalValue(1, 1)
ZERO = RadicalValue(0, 1)


def _check_modulus(k: int) -> None:
    if k < 1 or k % 2 == 0:
        raise ValueError(f"Gauss sums are defined for odd positive k, got {k}")


def _valuation(m: int, p: int) -> int | None:
    """p-adic valuation of m, ``None`` standing for infinity when m = 0."""
    if m == 0:
        return None
    a = 0
    while m % p == 0:
        m //= p
        a += 1
    return a


def gauss_prime_power(m: int, p: int, b: int) -> RadicalValue:
    """G_m(p^b) for an odd prime p and b >= 1 from the five-case table."""
    a = _valuation(m, p)
    if a is None or b <= a:
        if b & 1:
            return ZERO
        return RadicalValue(p**b - p ** (b - 1))
    if b == a + 1:
        if b % 2 == 0:
            return RadicalValue(-(p**a))
        unit = m // p**a
        return RadicalValue(kronecker(unit, p) * p**a, p)
    return ZERO


def gauss_exact(m: int, k: int, tables: SieveTables | None = None) -> RadicalValue:
    """Exact G_m(k) via multiplicativity in k and the prime-power table."""
    m = int(m)
    k = int(k)
    _check_modulus(k)
    value = ONE
    for p, b in factorize(k, tables):
        value = value * gauss_prime_power(m, p, b)
        if not value:
            return ZERO
    return value


@lru_cache(maxsize=4096)
def _jacobi_row(k: int) -> np.ndarray:
    """(a/k) for a = 0..k-1 as float64, via Legendre tables per prime."""
    row = np.ones(k, dtype=np.int8)
    a = np.arange(k)
    for p, e in factorize(k):
        if not e & 1:
            row[a % p == 0] = 0
            continue
        leg = np.full(p, -1, dtype=np.int8)
        leg[(np.arange(1, p) ** 2) % p] = 1
        leg[0] = 0
        row *= leg[a % p]
    out = row.astype(np.float64)
    out.setflags(write=False)
    return out


def _prefactor(k: int) -> complex:
    chi = kronecker(-1, k)
    return (1 - 1j) / 2 + chi * (1 + 1j) / 2


def gauss_naive(m: int, k: int) -> complex:
    """G_m(k) by direct summation over residues a mod k.

    O(k); only intended as a verification path, so ``k`` is capped at
    ``NAIVE_MAX_K``.
    """
    m = int(m)
    k = int(k)
    _check_modulus(k)
    if k > NAIVE_MAX_K:
        raise ValueError(f"gauss_naive is capped at k <= {NAIVE_MAX_K}")
    if k == 1:
        return complex(_prefactor(1))
    row = _jacobi_row(k)
    # reduce a*m mod k in integers so the phase stays accurate for large m
    phase = (np.arange(k, dtype=np.int64) * (m % k)) % k
    total = np.sum(row * np.exp(2j * np.pi * phase / k))
    return complex(_prefactor(k) * total)


def gauss_naive_many(ms, k: int) -> np.ndarray:
    """Vectorized :func:`gauss_naive` over several m for one modulus k."""
    k = int(k)
    _check_modulus(k)
    if k > NAIVE_MAX_K:
        raise ValueError(f"gauss_naive is capped at k <= {NAIVE_MAX_K}")
    ms = np.asarray(ms, dtype=np.int64)
    if k == 1:
        return np.full(ms.shape, _prefactor(1), dtype=complex)
    row = _jacobi_row(k)
    roots = np.exp(2j * np.pi * np.arange(k) / k)
    phase = (np.arange(k, dtype=np.int64)[None, :] * (ms % k)[:, None]) % k
    return _prefactor(k) * (roots[phase] @ row)


__all__ = [
    "RadicalValue",
    "gauss_exact",
    "gauss_naive",
    "gauss_naive_many",
    "gauss_prime_power",
    "NAIVE_MAX_K",
]

