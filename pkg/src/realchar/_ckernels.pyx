# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the smoothed mean square.

For each odd square-free d the character n -> (8d/n) is evaluated at odd
primes only and extended to odd composites through the least-prime-factor
table. At primes the value is a lookup in per-prime tables of (8r/p), with
r = d mod p carried from one d to the next by addition; when the tables
would be too large the binary Jacobi algorithm is used instead.

Blocks of d are independent; each block is reduced with Kahan summation in
ascending d order, so the block partials do not depend on the thread count.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport parallel, prange
from libc.stdlib cimport malloc, free
from libc.math cimport fabs

from ._tables import chi8_tables

cnp.import_array()

BACKEND = "cython"


cdef inline int _jacobi(long long a, long long n) noexcept nogil:
    # n odd and positive
    cdef int k = 1
    cdef long long t
    a = a % n
    if a < 0:
        a += n
    while a != 0:
        while (a & 1) == 0:
            a >>= 1
            t = n & 7
            if t == 3 or t == 5:
                k = -k
        t = a
        a = n
        n = t
        if (a & 3) == 3 and (n & 3) == 3:
            k = -k
        a = a % n
    if n == 1:
        return k
    return 0


cdef inline int _chi8d_prime(long long d, long long p) noexcept nogil:
    # (8d/p) = (2/p) (d/p) for odd p
    cdef long long r = p & 7
    cdef int s = 1
    if r == 3 or r == 5:
        s = -1
    return s * _jacobi(d, p)


def jacobi(long long a, long long n):
    if n <= 0 or (n & 1) == 0:
        raise ValueError("jacobi symbol needs an odd positive modulus")
    return _jacobi(a, n)


cdef class _Plan:
    """Read-only tables for odd n <= n_max, shared by all threads."""
    cdef object keep
    cdef Py_ssize_t n_max
    cdef const int* lpf
    cdef const int* cof
    cdef const signed char* flat
    cdef const long long* offsets
    cdef const long long* primes
    cdef Py_ssize_t nprimes

    def __cinit__(self, Py_ssize_t n_max, lpf):
        cdef const int[::1] lv
        cdef const int[::1] cv
        cdef const signed char[::1] fv
        cdef const long long[::1] ov
        cdef const long long[::1] pv
        self.n_max = n_max
        lpf_arr = np.ascontiguousarray(np.asarray(lpf)[: n_max + 1], dtype=np.int32)
        idx = np.arange(n_max + 1, dtype=np.int32)
        # cofactor n / lpf(n), so composites need no division
        cof = np.zeros(n_max + 1, dtype=np.int32)
        cof[2:] = idx[2:] // lpf_arr[2:]
        odd = idx[3::2]
        primes = odd[lpf_arr[3::2] == odd].astype(np.int64)
        tables = chi8_tables(n_max, lpf_arr) if n_max >= 3 else None
        self.keep = (lpf_arr, cof, primes, tables)
        lv = lpf_arr
        cv = cof
        self.lpf = &lv[0]
        self.cof = &cv[0]
        self.nprimes = primes.shape[0]
        self.primes = NULL
        self.flat = NULL
        self.offsets = NULL
        if self.nprimes:
            pv = primes
            self.primes = &pv[0]
        if tables is not None:
            fv = tables[0]
            ov = tables[1]
            self.flat = &fv[0]
            self.offsets = &ov[0]


cdef inline void _residues(long long d, long long prev, bint fresh,
                           const long long* primes, Py_ssize_t nprimes, long long* res) noexcept nogil:
    """res[j] = d mod primes[j], advanced from prev when d > prev."""
    cdef Py_ssize_t j
    cdef long long p, r, step = d - prev
    if fresh or step < 0:
        for j in range(nprimes):
            res[j] = d % primes[j]
        return
    for j in range(nprimes):
        p = primes[j]
        r = res[j] + step
        if r >= p:
            r -= p
            if r >= p:
                r = r % p
        res[j] = r


cdef double _inner(_Plan plan, long long d, const double* phi, signed char* chi,
                   const long long* res) noexcept nogil:
    """Fill chi at odd n <= n_max and return sum chi(n) phi[n].

    With tables, ``res`` must hold d mod p for every odd prime p <= n_max.
    """
    cdef Py_ssize_t n, j, n_max = plan.n_max
    cdef int p
    cdef double s = 0.0
    if n_max < 1:
        return 0.0
    if plan.flat != NULL:
        for j in range(plan.nprimes):
            p = plan.primes[j]
            chi[p] = plan.flat[plan.offsets[p] + res[j]]
    chi[1] = 1
    s = phi[1]
    n = 3
    while n <= n_max:
        p = plan.lpf[n]
        if p != n:
            chi[n] = chi[p] * chi[plan.cof[n]]
        elif plan.flat == NULL:
            chi[n] = <signed char>_chi8d_prime(d, n)
        s = s + chi[n] * phi[n]
        n += 2
    return s


cdef class _Scratch:
    """Buffers for the single-threaded entry points."""
    cdef signed char* chi
    cdef long long* res

    def __cinit__(self, _Plan plan):
        self.chi = <signed char*> malloc(plan.n_max + 2)
        self.res = <long long*> malloc((plan.nprimes + 1) * sizeof(long long))
        if self.chi == NULL or self.res == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.chi)
        free(self.res)


def chi_table(long long d, int n_max, const int[::1] lpf):
    """(8d/n) for 0 <= n <= n_max as int8 (zero at even n)."""
    out = np.zeros(n_max + 1, dtype=np.int8)
    cdef signed char[::1] view = out
    cdef double[::1] zeros = np.zeros(n_max + 2)
    cdef Py_ssize_t n
    if n_max < 1:
        return out
    cdef _Plan plan = _Plan(n_max, lpf)
    cdef _Scratch buf = _Scratch(plan)
    _residues(d, 0, True, plan.primes, plan.nprimes, buf.res)
    _inner(plan, d, &zeros[0], buf.chi, buf.res)
    for n in range(1, n_max + 1, 2):
        view[n] = buf.chi[n]
    return out


def inner_sums(const long long[::1] ds, const double[::1] phi, const int[::1] lpf):
    """sum_n (8d/n) phi[n] for each d; ``phi`` is indexed by n."""
    cdef Py_ssize_t n_max = phi.shape[0] - 1
    cdef Py_ssize_t i, m = ds.shape[0]
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] ov = out
    if m == 0 or n_max < 1:
        return out
    cdef _Plan plan = _Plan(n_max, lpf)
    cdef _Scratch buf = _Scratch(plan)
    with nogil:
        for i in range(m):
            _residues(ds[i], ds[i - 1] if i else 0, i == 0, plan.primes, plan.nprimes, buf.res)
            ov[i] = _inner(plan, ds[i], &phi[0], buf.chi, buf.res)
    return out


cdef void _block(_Plan plan, const long long[::1] ds, const double[::1] wts, const double* phi,
                 signed char* chi, long long* res, Py_ssize_t lo, Py_ssize_t hi,
                 double* partial, double* peak) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, c = 0.0, y, t, v, big = 0.0
    if chi == NULL or res == NULL:
        partial[0] = 0.0
        peak[0] = -1.0
        return
    for i in range(lo, hi):
        _residues(ds[i], ds[i - 1] if i > lo else 0, i == lo, plan.primes, plan.nprimes, res)
        v = _inner(plan, ds[i], phi, chi, res)
        if fabs(v) > big:
            big = fabs(v)
        y = wts[i] * v * v - c
        t = s + y
        c = (t - s) - y
        s = t
    partial[0] = s
    peak[0] = big


def block_partials(const long long[::1] ds, const double[::1] wts, const double[::1] phi,
                   const int[::1] lpf, Py_ssize_t block, int threads):
    """Kahan-reduced sum of w(d) * inner(d)^2 over consecutive blocks of d.

    Returns ``(partials, peaks)`` where ``peaks`` holds the largest
    |inner(d)| seen in each block.
    """
    cdef Py_ssize_t m = ds.shape[0]
    cdef Py_ssize_t n_max = phi.shape[0] - 1
    cdef Py_ssize_t nblocks = (m + block - 1) // block
    cdef Py_ssize_t b, lo, hi
    partials = np.zeros(nblocks, dtype=np.float64)
    peaks = np.zeros(nblocks, dtype=np.float64)
    cdef double[::1] pv = partials
    cdef double[::1] kv = peaks
    cdef signed char* chi
    cdef long long* res
    if nblocks == 0 or n_max < 1:
        return partials, peaks
    cdef _Plan plan = _Plan(n_max, lpf)
    cdef const double* ph = &phi[0]
    if threads < 1:
        threads = 1
    with nogil, parallel(num_threads=threads):
        chi = <signed char*> malloc(n_max + 2)
        res = <long long*> malloc((plan.nprimes + 1) * sizeof(long long))
        for b in prange(nblocks, schedule="dynamic"):
            lo = b * block
            hi = lo + block
            if hi > m:
                hi = m
            _block(plan, ds, wts, ph, chi, res, lo, hi, &pv[b], &kv[b])
        free(chi)
        free(res)
    if (peaks < 0).any():
        raise MemoryError("could not allocate a character buffer")
    return partials, peaks
