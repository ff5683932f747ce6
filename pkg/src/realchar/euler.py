"""Euler products behind the main-term constants.

Local factors are functions of x = 1/p. Every product converges like
prod (1 + c x^2 + O(x^3)), so truncating at a cutoff P alone leaves a
relative error of order 1/(P log P). Values are therefore reported with
the x^2 part of the omitted primes restored exactly through the prime zeta
function, which leaves an O(1/P^2) remainder; ``tail_estimate`` bounds
that remainder.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .arith import build_sieves, factorize, is_squarefree
from .gauss import gauss_prime_power
from .smoothfn import h1_tilde_half

ZETA_AT_ZERO = Fraction(-1, 2)
DEFAULT_PRIME_CUTOFF = 10**5
DEFAULT_A_MAX = 10**4
MIN_PRIME_CUTOFF = 10**3


class RegionError(ValueError):
    """(X, Y) outside Y <= X <= Y^2."""


@dataclass(frozen=True)
class EulerProductValue:
    """Numeric Euler product.

    Attributes:
        value: product with the x^2 part of the omitted primes restored.
        prime_cutoff: largest prime included term by term.
        tail_estimate: bound on |log(value) - log(exact product)|.
        raw: the plain truncated product over primes <= prime_cutoff.
    """

    value: float
    prime_cutoff: int
    tail_estimate: float
    raw: float

    def to_dict(self) -> dict:
        return asdict(self)


# -- primes and tail sums --------------------------------------------------------


@lru_cache(maxsize=8)
def odd_primes(cutoff: int) -> np.ndarray:
    tables = build_sieves(max(int(cutoff), 16))
    p = tables.primes(int(cutoff), start=3)
    p.setflags(write=False)
    return p


@lru_cache(maxsize=1)
def _prime_zeta_2() -> float:
    return float(mpmath.primezeta(2))


@lru_cache(maxsize=16)
def prime_square_tail(cutoff: int) -> float:
    """sum over primes p > cutoff of 1/p^2."""
    ps = odd_primes(cutoff)
    head = math.fsum((1.0 / (ps.astype(np.float64) ** 2)).tolist()) + 0.25
    return _prime_zeta_2() - head


def _cubic_remainder_constant(log_factor, c2: float, cutoff: int) -> float:
    """sup over 0 < x <= 1/cutoff of |log f(x) - c2 x^2| / x^3 (high precision)."""
    best = mpmath.mpf(0)
    with mpmath.workdps(40):
        top = mpmath.mpf(1) / cutoff
        for j in range(41):
            x = top * mpmath.mpf(2) ** (-j / 4)
            r = abs(log_factor(x) - c2 * x * x) / x**3
            best = max(best, r)
    return float(best) * 1.01


def _accelerated(logs: np.ndarray, head: float, c2: float, cutoff: int, log_factor) -> EulerProductValue:
    log_raw = math.fsum(logs.tolist())
    log_val = log_raw + c2 * prime_square_tail(cutoff)
    k = _cubic_remainder_constant(log_factor, c2, cutoff)
    tail = k / (2.0 * cutoff * cutoff)
    return EulerProductValue(
        value=head * math.exp(log_val),
        prime_cutoff=int(cutoff),
        tail_estimate=tail,
        raw=head * math.exp(log_raw),
    )


# -- Z_2 -----------------------------------------------------------------------


def _check_odd_prime(p: int) -> None:
    if p == 2:
        raise ValueError("p = 2 is non-generic; see z3_at_zero")
    if p < 3 or factorize(p) != [(p, 1)]:
        raise ValueError(f"p must be an odd prime, got {p}")


def z2_local_factor(p: int, u: float, v: float) -> float:
    """Local factor at an odd prime p of Z(u,v) / (zeta(2u) zeta(2v) zeta(u+v))."""
    if p == 2:
        raise ValueError("the p = 2 factor is the bare zeta normalizer (1/8 at u = v = 1/2)")
    _check_odd_prime(p)
    if u <= 0.25 or v <= 0.25:
        raise ValueError("need u, v > 1/4")
    a = 1.0 / (1.0 - p ** (-2 * u))
    b = 1.0 / (1.0 - p ** (-2 * v))
    w = p / (p + 1.0)
    z = 1.0 + w * (p ** (-(u + v)) * a * b + a * b - 1.0)
    return (1.0 - p ** (-2 * u)) * (1.0 - p ** (-2 * v)) * (1.0 - p ** (-(u + v))) * z


def z2_local_series(p: int, u: float, v: float, truncation: int = 60) -> float:
    """Same local factor from the defining double series, summed term by term.

    Sums p^(-n1 u - n2 v) over n1 + n2 even, n1 + n2 <= truncation, with
    weight 1 at (0, 0) and p/(p+1) elsewhere, then applies the normalizers.
    """
    w = p / (p + 1.0)
    terms = []
    for n1 in range(truncation + 1):
        for n2 in range(truncation + 1 - n1):
            if (n1 + n2) % 2:
                continue
            t = p ** (-(n1 * u + n2 * v))
            terms.append(t if n1 == n2 == 0 else w * t)
    s = math.fsum(terms)
    return (1.0 - p ** (-2 * u)) * (1.0 - p ** (-2 * v)) * (1.0 - p ** (-(u + v))) * s


def _z2_half_vec(x: np.ndarray) -> np.ndarray:
    return (1 - x) ** 3 + (1 - x) * (3 * x - x * x) / (1 + x)


def _z2_half_log_mp(x):
    return mpmath.log((1 - x) ** 3 + (1 - x) * (3 * x - x * x) / (1 + x))


def z2_at_half(prime_cutoff: int = DEFAULT_PRIME_CUTOFF) -> EulerProductValue:
    """Z_2(1/2, 1/2): 1/8 from p = 2 times the odd-prime local factors."""
    prime_cutoff = int(prime_cutoff)
    if prime_cutoff < MIN_PRIME_CUTOFF:
        raise ValueError(f"prime_cutoff must be at least {MIN_PRIME_CUTOFF}")
    x = 1.0 / odd_primes(prime_cutoff).astype(np.float64)
    logs = np.log1p(_z2_half_vec(x) - 1.0)
    return _accelerated(logs, 0.125, -4.0, prime_cutoff, _z2_half_log_mp)


# -- Z_3 -----------------------------------------------------------------------


def z3_local_factor_limit(p: int) -> float:
    """gamma -> 0 limit of the normalized generic local factor.

    Equals (1-x)^3 (1 + (1-x) sum_{j>=1} (2j+1) x^j) = (1-x)^2 (1 + 2x - x^2).
    """
    _check_odd_prime(p)
    x = 1.0 / p
    return (1 - x) ** 2 * (1 + 2 * x - x * x)


def z3_nongeneric_factor(p: int) -> float:
    """Normalized gamma -> 0 local factor at p | 2a: only k2 survives, giving (1-1/p)^3."""
    x = 1.0 / p
    return (1 - x) ** 3


def z3_ratio(p: int) -> float:
    """Non-generic over generic factor at p."""
    x = 1.0 / p
    return (1 - x) / (1 + 2 * x - x * x)


def z3_local_factor(p: int, gamma: float) -> float:
    """Closed form of (1-p^-2g)(1-p^-1-2g)(1-1/p)^2 sum_{k2,n1,n2} G/(...) for g > 0."""
    _check_odd_prime(p)
    if gamma <= 0:
        raise ValueError("gamma must be positive; use z3_local_factor_limit for gamma -> 0")
    x = 1.0 / p
    y = p ** (-2.0 * gamma)
    z = x * y
    head = 1.0 + (1 - x) * (2 * z / (1 - z) ** 2 + z / (1 - z))
    return (1 - z) * (1 - x) ** 2 * (head + (1 - y) * 2 * x / (1 - z) ** 2)


def z3_local_series(p: int, gamma: float, tol: float = 1e-18) -> float:
    """Pre-limit local factor by summing the k2 series term by term.

    The n-sums at fixed k2 are collapsed with the prime-power Gauss sum
    table, giving c(k2) = 1 + (1-x) sum_{j=1}^{k2} (2j+1) x^j + (2k2+2) x^(k2+1).
    """
    _check_odd_prime(p)
    x = 1.0 / p
    y = p ** (-2.0 * gamma)
    total = 0.0
    comp = 0.0
    inner = 0.0
    yk = 1.0
    k2 = 0
    while True:
        if k2:
            inner += (2 * k2 + 1) * x**k2
        c = 1.0 + (1 - x) * inner + (2 * k2 + 2) * x ** (k2 + 1)
        term = yk * c
        t = total + (term - comp)
        comp = (t - total) - (term - comp)
        total = t
        if term < tol * (1 - y) and k2 > 8:
            break
        yk *= y
        k2 += 1
    return (1 - y) * (1 - x * y) * (1 - x) ** 2 * total


def z3_local_triple_sum(p: int, gamma: float, truncation: int = 60) -> float:
    """Definitional oracle: the (k2, n1, n2) triple series with exact Gauss sums.

    sum over k2, n1, n2 <= truncation of
        G_{p^(2 k2)}(p^(n1+n2)) / p^((n1+n2)/2 + 2 k2 gamma + n1 + n2),
    times (1-p^-2g)(1-p^-1-2g)(1-1/p)^2.
    """
    _check_odd_prime(p)
    gvals: dict = {}

    def g(k2: int, i: int) -> float:
        key = (k2, i)
        if key not in gvals:
            gvals[key] = 1.0 if i == 0 else float(gauss_prime_power(p ** (2 * k2), p, i))
        return gvals[key]

    terms = []
    for k2 in range(truncation + 1):
        for n1 in range(truncation + 1):
            for n2 in range(truncation + 1):
                i = n1 + n2
                gv = g(k2, i)
                if gv == 0.0:
                    continue
                terms.append(gv * p ** (-(1.5 * i + 2 * k2 * gamma)))
    s = math.fsum(terms)
    return (1 - p ** (-2 * gamma)) * (1 - p ** (-1 - 2 * gamma)) * (1 - 1.0 / p) ** 2 * s


def richardson_limit(f, h0: float, levels: int = 6) -> float:
    """Extrapolate f(h) to h -> 0 from h0, h0/2, ..., assuming a power series in h."""
    table = [[f(h0 / 2**k)] for k in range(levels)]
    for j in range(1, levels):
        for k in range(j, levels):
            table[k].append((2**j * table[k][j - 1] - table[k - 1][j - 1]) / (2**j - 1))
    return table[-1][-1]


def _z3_gen_vec(x: np.ndarray) -> np.ndarray:
    return (1 - x) ** 2 * (1 + 2 * x - x * x)


def _z3_gen_log_mp(x):
    return mpmath.log((1 - x) ** 2 * (1 + 2 * x - x * x))


@lru_cache(maxsize=16)
def _z3_base(prime_cutoff: int) -> EulerProductValue:
    x = 1.0 / odd_primes(prime_cutoff).astype(np.float64)
    logs = np.log1p(_z3_gen_vec(x) - 1.0)
    return _accelerated(logs, 0.125, -4.0, prime_cutoff, _z3_gen_log_mp)


def z3_at_zero(a: int, prime_cutoff: int = DEFAULT_PRIME_CUTOFF) -> EulerProductValue:
    """Z_3(0; a) for odd square-free a.

    Generic primes contribute :func:`z3_local_factor_limit`; p = 2 and the
    primes dividing a contribute :func:`z3_nongeneric_factor`.
    """
    a = int(a)
    if a < 1 or a % 2 == 0 or not is_squarefree(a):
        raise ValueError(f"a must be an odd square-free positive integer, got {a}")
    base = _z3_base(int(prime_cutoff))
    ratio = 1.0
    for p, _ in factorize(a):
        ratio *= z3_ratio(p)
    # a prime of a above the cutoff is not in raw; its generic factor is in the tail
    raw_ratio = 1.0
    for p, _ in factorize(a):
        raw_ratio *= z3_ratio(p) if p <= prime_cutoff else z3_nongeneric_factor(p)
    return EulerProductValue(
        value=base.value * ratio,
        prime_cutoff=base.prime_cutoff,
        tail_estimate=base.tail_estimate,
        raw=base.raw * raw_ratio,
    )


def _c2_vec(x: np.ndarray) -> np.ndarray:
    return 1 - x * x * (1 - x) / (1 + 2 * x - x * x)


def _c2_log_mp(x):
    return mpmath.log(1 - x * x * (1 - x) / (1 + 2 * x - x * x))


def c2_a_sum(a_max: int = DEFAULT_A_MAX, prime_cutoff: int = DEFAULT_PRIME_CUTOFF, method: str = "euler") -> float:
    """sum over odd square-free a of mu(a) Z_3(0; a) / a^2.

    ``method="direct"`` sums the series over a <= a_max. ``method="euler"``
    (default) uses Z_3(0;1) prod_p (1 - r_p / p^2) with r_p the
    non-generic/generic ratio; it does not depend on ``a_max``.
    """
    a_max = int(a_max)
    if a_max < 1:
        raise ValueError("a_max must be at least 1")
    if method == "direct":
        tables = build_sieves(max(a_max, 16))
        base = _z3_base(int(prime_cutoff)).value
        terms = []
        for a in range(1, a_max + 1, 2):
            mu = int(tables.mobius[a])
            if mu == 0:
                continue
            r = 1.0
            for p, _ in factorize(a, tables):
                r *= z3_ratio(p)
            terms.append(mu * base * r / (a * a))
        return math.fsum(terms)
    if method == "euler":
        return c2_euler_product(prime_cutoff).value
    raise ValueError(f"unknown method {method!r}")


def c2_euler_product(prime_cutoff: int = DEFAULT_PRIME_CUTOFF) -> EulerProductValue:
    prime_cutoff = int(prime_cutoff)
    x = 1.0 / odd_primes(prime_cutoff).astype(np.float64)
    logs = np.log1p(_c2_vec(x) - 1.0)
    acc = _accelerated(logs, 1.0, -1.0, prime_cutoff, _c2_log_mp)
    base = _z3_base(prime_cutoff)
    return EulerProductValue(
        value=base.value * acc.value,
        prime_cutoff=prime_cutoff,
        tail_estimate=base.tail_estimate + acc.tail_estimate,
        raw=base.raw * acc.raw,
    )


# -- constants and prediction ----------------------------------------------------


@dataclass(frozen=True)
class Constants:
    C1: float
    C2: float
    h1_tilde_half: float
    z2: EulerProductValue
    c2_sum: float
    c2_sum_direct: float
    prime_cutoff: int
    a_max: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["z2"] = self.z2.to_dict()
        return d


def constants(
    phi,
    w,
    prime_cutoff: int = DEFAULT_PRIME_CUTOFF,
    a_max: int = DEFAULT_A_MAX,
) -> Constants:
    """C1 = h1 Z_2(1/2,1/2) / pi^2 and C2 = zeta(0) h1 c2_sum / 4."""
    h1 = h1_tilde_half(phi, w)
    z2 = z2_at_half(prime_cutoff)
    c2 = c2_a_sum(a_max, prime_cutoff, method="euler")
    c2_direct = c2_a_sum(a_max, prime_cutoff, method="direct")
    c1_val = h1 * z2.value / math.pi**2
    c2_val = 0.25 * float(ZETA_AT_ZERO) * h1 * c2
    return Constants(c1_val, c2_val, h1, z2, c2, c2_direct, int(prime_cutoff), int(a_max))


@dataclass(frozen=True)
class Prediction:
    C1: float
    C2: float
    X: float
    Y: float
    term1: float
    term2: float
    total: float

    def to_dict(self) -> dict:
        return asdict(self)


def check_region(X: float, Y: float) -> None:
    if not (Y <= X <= Y * Y):
        raise RegionError(
            f"(X, Y) = ({X:g}, {Y:g}) is outside the region Y <= X <= Y^2 "
            f"where the main-term formula applies"
        )


def predict(C1: float, C2: float, X: float, Y: float) -> Prediction:
    """Main terms C1 X Y log Y + C2 X Y log(Y^2 / X)."""
    check_region(X, Y)
    term1 = C1 * X * Y * math.log(Y)
    term2 = C2 * X * Y * math.log(Y * Y / X)
    return Prediction(C1, C2, X, Y, term1, term2, term1 + term2)
