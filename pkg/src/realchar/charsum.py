"""Brute-force evaluation of the smoothed mean square of real character sums.

    S(X, Y; Phi, W) = sum over odd square-free d of
                      W(d/X) * (sum_n (8d/n) Phi(n/Y))^2

Two strategies compute the same number. :func:`mean_square_oracle` calls
:func:`~realchar.arith.kronecker` for every (d, n) pair and is only meant
for small inputs. :func:`mean_square` evaluates the character at primes
and extends multiplicatively, in blocks of d that are reduced in a fixed
order, so its result does not depend on the thread count.

:func:`poisson_check` compares both sides of the quadratic Poisson
summation formula for a single odd modulus.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _backend
from .arith import build_sieves, is_squarefree, kronecker, SieveTables
from .gauss import gauss_exact
from .smoothfn import DecayEnvelope, cache_for, fit_decay

ORACLE_BUDGET = 10**8
BLOCK_SIZE = 512
POISSON_TAIL_TARGET = 1e-8
POISSON_TAIL_LIMIT = 1e-6
ENVELOPE_POWERS = (3.0, 4.0, 6.0, 8.0)

_sieves: SieveTables | None = None


class OracleBudgetError(ValueError):
    """X*Y is too large for the direct double loop."""


def sieves(limit: int) -> SieveTables:
    """Shared sieve tables covering at least ``limit`` (grown by doubling)."""
    global _sieves
    limit = max(int(limit), 64)
    if _sieves is None or _sieves.limit < limit:
        size = 1 << (limit - 1).bit_length()
        _sieves = build_sieves(size)
    return _sieves


def default_threads() -> int:
    env = os.environ.get("REALCHAR_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class MeanSquareResult:
    X: float
    Y: float
    value: float
    d_count: int
    strategy: str
    elapsed: float
    max_abs_inner: float = 0.0
    backend: str = ""
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PoissonCheckReport:
    n: int
    X: float
    lhs: float
    rhs: float
    k_max: int
    tail_bound: float
    abs_error: float = field(init=False)

    def __post_init__(self):
        self.abs_error = abs(self.lhs - self.rhs)


def _n_limit(Y: float) -> int:
    """Largest integer strictly below Y (at least 0)."""
    return max(0, math.ceil(Y) - 1)


def _phi_table(phi, Y: float, n_limit: int | None = None) -> np.ndarray:
    n_max = _n_limit(Y) if n_limit is None else int(n_limit)
    vals = np.asarray(phi(np.arange(n_max + 1, dtype=np.float64) / Y), dtype=np.float64)
    vals[0] = 0.0
    return np.ascontiguousarray(vals)


def _check_d(d: int) -> None:
    if d < 1 or d % 2 == 0 or not is_squarefree(d):
        raise ValueError(f"d must be an odd square-free positive integer, got {d}")


def inner_sum(d: int, Y: float, phi, n_limit: int | None = None) -> float:
    """sum over 1 <= n < Y of (8d/n) phi(n/Y)."""
    d = int(d)
    _check_d(d)
    if Y <= 0:
        raise ValueError("Y must be positive")
    table = _phi_table(phi, Y, n_limit)
    if table.size <= 1:
        return 0.0
    lpf = sieves(table.size).least_prime_factor
    kern = _backend.kernels
    return float(kern.inner_sums(np.array([d], dtype=np.int64), table, lpf)[0])


def mean_square_oracle(X: float, Y: float, phi, w) -> MeanSquareResult:
    """Direct double loop; every Kronecker symbol computed on its own."""
    if X < 1 or Y < 1:
        raise ValueError("X and Y must be at least 1")
    if X * Y > ORACLE_BUDGET:
        raise OracleBudgetError(
            f"X*Y = {X * Y:.3g} exceeds the oracle budget {ORACLE_BUDGET:.0e}; use mean_square"
        )
    start = time.perf_counter()
    n_max = _n_limit(Y)
    phi_vals = [float(v) for v in phi(np.arange(n_max + 1, dtype=np.float64) / Y)]
    terms = []
    d_count = 0
    peak = 0.0
    for d in range(1, _n_limit(X) + 1, 2):
        wd = float(w(np.array([d / X]))[0])
        if wd == 0.0 or not is_squarefree(d):
            continue
        d_count += 1
        s = 0.0
        for n in range(1, n_max + 1):
            s += kronecker(8 * d, n) * phi_vals[n]
        peak = max(peak, abs(s))
        terms.append(wd * s * s)
    return MeanSquareResult(
        X=X,
        Y=Y,
        value=math.fsum(terms),
        d_count=d_count,
        strategy="oracle",
        elapsed=time.perf_counter() - start,
        max_abs_inner=peak,
        backend="python",
        threads=1,
    )


def active_d(X: float, w) -> tuple[np.ndarray, np.ndarray]:
    """Odd square-free d < X with w(d/X) != 0, and the weights w(d/X)."""
    d_max = _n_limit(X)
    if d_max < 1:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    lo, hi = w.support
    # support test first: only d with lo < d/X < hi can contribute
    first = max(1, int(math.floor(lo * X)))
    last = min(d_max, int(math.ceil(hi * X)))
    ds = sieves(last).squarefree_odd_upto(last)
    ds = ds[ds >= first]
    wts = np.asarray(w(ds / X), dtype=np.float64)
    keep = wts != 0.0
    return np.ascontiguousarray(ds[keep]), np.ascontiguousarray(wts[keep])


def mean_square(
    X: float,
    Y: float,
    phi,
    w,
    threads: int | None = None,
    backend: str | None = None,
    n_limit: int | None = None,
) -> MeanSquareResult:
    """Sieved evaluation of S(X, Y; phi, w).

    Args:
        threads: worker threads (default: ``REALCHAR_THREADS`` or all cores).
            The value is bit-identical for every thread count.
        backend: ``"cython"`` or ``"python"`` to bypass the import-time choice.
        n_limit: evaluate the inner sums up to this n instead of the largest
            integer below Y. Terms beyond the support of phi are zero, so any
            larger value leaves the result unchanged.
    """
    if X < 1 or Y < 1:
        raise ValueError("X and Y must be at least 1")
    start = time.perf_counter()
    threads = default_threads() if threads is None else max(1, int(threads))
    kern = _backend.get_kernels(backend)
    # headroom: |inner| <= Y and S <= X*Y^2
    if X * Y * Y >= 2.0**53:
        raise ValueError("X*Y^2 exceeds 2^53; double precision is not sufficient")

    ds, wts = active_d(X, w)
    table = _phi_table(phi, Y, n_limit)
    if ds.size == 0 or table.size <= 1:
        value, peak = 0.0, 0.0
    else:
        lpf = sieves(table.size).least_prime_factor
        partials, peaks = kern.block_partials(ds, wts, table, lpf, BLOCK_SIZE, threads)
        value = math.fsum(partials.tolist())
        peak = float(peaks.max())
    return MeanSquareResult(
        X=X,
        Y=Y,
        value=value,
        d_count=int(ds.size),
        strategy="sieved",
        elapsed=time.perf_counter() - start,
        max_abs_inner=peak,
        backend=kern.BACKEND,
        threads=threads,
    )


# -- Poisson summation ---------------------------------------------------------

_envelopes: dict = {}


def decay_envelopes(w) -> list[DecayEnvelope]:
    key = w.key
    if key not in _envelopes:
        _envelopes[key] = [fit_decay(w, p) for p in ENVELOPE_POWERS]
    return _envelopes[key]


def poisson_tail_bound(n: int, X: float, w, k_max: int) -> float:
    """Bound on the discarded |k| > k_max part of the dual sum.

    Uses |G_k(n)| <= n and the best of the fitted decay envelopes.
    """
    step = X / (2.0 * n)
    return min(X * env.tail_sum(k_max * step, step) for env in decay_envelopes(w))


def choose_k_max(n: int, X: float, w, target: float = POISSON_TAIL_TARGET) -> int:
    k = max(1, math.ceil(4.0 * n / X))
    while poisson_tail_bound(n, X, w, k) >= target:
        k *= 2
        if k > 1 << 24:
            raise RuntimeError("could not reach the Poisson tail target")
    # bisect down to the smallest power-of-two bracket member that works
    lo, hi = k // 2, k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if poisson_tail_bound(n, X, w, mid) < target:
            hi = mid
        else:
            lo = mid
    return hi


def poisson_check(n: int, X: float, w, k_max: int | None = None) -> PoissonCheckReport:
    """Evaluate both sides of the quadratic Poisson summation formula.

    lhs = sum over odd d of (d/n) w(d/X)
    rhs = X/(2n) (2/n) sum_{|k| <= k_max} (-1)^k G_k(n) tilde(w)(kX/(2n))
    """
    n = int(n)
    if n < 1 or n % 2 == 0:
        raise ValueError(f"n must be an odd positive integer, got {n}")
    if X <= 0:
        raise ValueError("X must be positive")
    if k_max is None:
        k_max = choose_k_max(n, X, w)
    tail = poisson_tail_bound(n, X, w, k_max)
    if tail > POISSON_TAIL_LIMIT:
        raise ValueError(f"k_max={k_max} leaves a tail bound of {tail:.3g} > {POISSON_TAIL_LIMIT:g}")

    lo, hi = w.support
    d_lo = max(1, int(math.floor(lo * X)))
    d_hi = int(math.ceil(hi * X))
    ds = np.arange(d_lo | 1, d_hi + 1, 2)
    wv = np.asarray(w(ds / X), dtype=np.float64)
    lhs = math.fsum(kronecker(int(d), n) * float(v) for d, v in zip(ds, wv) if v != 0.0)

    step = X / (2.0 * n)
    cache = cache_for(w)
    tables = sieves(max(n, 64))
    terms = []
    for k in range(-k_max, k_max + 1):
        g = gauss_exact(k, n, tables)
        if not g:
            continue
        sign = -1.0 if k & 1 else 1.0
        terms.append(sign * float(g) * cache.tilde(k * step))
    rhs = step * kronecker(2, n) * math.fsum(terms)
    return PoissonCheckReport(n=n, X=X, lhs=lhs, rhs=rhs, k_max=k_max, tail_bound=tail)
