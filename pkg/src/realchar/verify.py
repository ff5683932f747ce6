"""Verification suites: oracle comparisons and identities across modules.

Each suite returns a :class:`SuiteReport`; ``run_suite("all")`` runs them
in order. Tolerances are module constants so tests can pin them.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _backend, charsum, euler
from .arith import build_sieves, euler_phi, is_odd_square
from .gauss import gauss_exact, gauss_naive_many, gauss_prime_power
from .smoothfn import SmoothWindow, h1_tilde_half, h1_tilde_half_direct

SUITES = ("gauss", "poisson", "oracle", "euler")

GAUSS_K_MAX = 3465
GAUSS_M_RANGE = 50
GAUSS_TABLE_LIMIT = 10**4
GAUSS_TABLE_A_MAX = 6

POISSON_N_MAX = 199
POISSON_X_VALUES = (100.0, 1000.0)
POISSON_TOL = 1e-6

ORACLE_X = (50.0, 137.5, 311.0, 500.0)
ORACLE_Y = (10.0, 33.3, 61.3, 150.0, 200.0)
ORACLE_REL_TOL = 1e-9
THREAD_COUNTS = (1, 4, 8)

EULER_REL_TOL = 1e-6
TRIPLE_SUM_TOL = 1e-10
TRIPLE_SUM_PRIMES = (3, 5, 7)
TRIPLE_SUM_GAMMA = 0.25
TRIPLE_SUM_TRUNCATION = 60
RICHARDSON_GAMMA0 = 0.05
RICHARDSON_LEVELS = 6
RICHARDSON_TOL = 1e-8
H1_TOL = 1e-8

SECOND_WINDOW = SmoothWindow("shifted_power_bump", (0.1, 0.8, 2.0))


@dataclass
class SuiteReport:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, what: str) -> bool:
        self.checks += 1
        if not ok and len(self.failures) < 50:
            self.failures.append(what)
        elif not ok:
            self.details["suppressed_failures"] = self.details.get("suppressed_failures", 0) + 1
        return ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        return f"[{state}] {self.name}: {self.checks} checks, {len(self.failures)} failures, {self.elapsed:.1f}s"


# -- gauss -----------------------------------------------------------------------


def gauss_equivalence(report: SuiteReport, k_max: int = GAUSS_K_MAX, m_range: int = GAUSS_M_RANGE) -> None:
    """gauss_exact against the direct sum over residues."""
    ms = np.arange(-m_range, m_range + 1)
    tables = build_sieves(max(k_max, 64))
    worst = 0.0
    for k in range(1, k_max + 1, 2):
        naive = gauss_naive_many(ms, k)
        exact = np.array([float(gauss_exact(int(m), k, tables)) for m in ms])
        err = np.abs(naive.real - exact)
        im = np.abs(naive.imag)
        worst = max(worst, float(err.max()) / max(1.0, math.sqrt(k)))
        bad = (err >= 1e-6 * max(1.0, math.sqrt(k))) | (im >= 1e-9 * k)
        report.checks += ms.size - 1
        report.check(not bad.any(), f"k={k}: m={ms[bad].tolist()[:5]}")
    report.details["equivalence_worst_scaled_error"] = worst


def _table_expected(a, b: int, p: int, m: int) -> int | tuple:
    """Prime-power case analysis written out independently of the module."""
    if a is None or b <= a:
        return 0 if b % 2 else p ** (b - 1) * (p - 1)
    if b == a + 1:
        if b % 2 == 0:
            return -(p**a)
        unit = m // p**a
        # Euler's criterion for the Legendre symbol
        leg = pow(unit % p, (p - 1) // 2, p)
        return ((1 if leg == 1 else -1) * p**a, p)
    return 0


def gauss_table(report: SuiteReport, limit: int = GAUSS_TABLE_LIMIT, a_max: int = GAUSS_TABLE_A_MAX) -> None:
    """Every prime-power case for p^b <= limit and valuations 0..a_max plus m = 0."""
    tables = build_sieves(limit)
    # units coprime to every odd p, covering residues and non-residues
    units = (1, 2, -1, 3)
    for p in tables.primes(limit, start=3).tolist():
        b = 1
        while p**b <= limit:
            for a in range(a_max + 1):
                for u in units:
                    if u % p == 0:
                        continue
                    m = u * p**a
                    want = _table_expected(a, b, p, m)
                    got = gauss_prime_power(m, p, b)
                    got_t = (got.coefficient, got.radicand) if got.radicand != 1 else got.coefficient
                    report.check(got_t == want, f"G_{m}({p}^{b}) = {got!r}, expected {want}")
            want0 = _table_expected(None, b, p, 0)
            report.check(gauss_prime_power(0, p, b).coefficient == want0, f"G_0({p}^{b})")
            b += 1
    for k in range(1, limit + 1, 2):
        g = gauss_exact(0, k, tables)
        want = euler_phi(k, tables) if is_odd_square(k) else 0
        report.check(g.radicand == 1 and g.coefficient == want, f"G_0({k}) = {g!r}, expected {want}")


def suite_gauss(k_max: int = GAUSS_K_MAX) -> SuiteReport:
    report = SuiteReport("gauss")
    start = time.perf_counter()
    gauss_equivalence(report, k_max)
    gauss_table(report)
    report.elapsed = time.perf_counter() - start
    return report


# -- poisson ---------------------------------------------------------------------


def suite_poisson(n_max: int = POISSON_N_MAX, x_values=POISSON_X_VALUES, w=None) -> SuiteReport:
    report = SuiteReport("poisson")
    start = time.perf_counter()
    w = SmoothWindow() if w is None else w
    worst, worst_tail = 0.0, 0.0
    for X in x_values:
        for n in range(1, n_max + 1, 2):
            r = charsum.poisson_check(n, X, w)
            worst = max(worst, r.abs_error)
            worst_tail = max(worst_tail, r.tail_bound)
            report.check(r.abs_error < POISSON_TOL, f"n={n}, X={X}: |lhs-rhs|={r.abs_error:.3g}")
            report.check(r.tail_bound < charsum.POISSON_TAIL_TARGET, f"n={n}, X={X}: tail={r.tail_bound:.3g}")
    report.details.update(max_abs_error=worst, max_tail_bound=worst_tail)
    report.elapsed = time.perf_counter() - start
    return report


# -- oracle ----------------------------------------------------------------------


def oracle_grid():
    return [(X, Y) for X in ORACLE_X for Y in ORACLE_Y]


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _backend.BACKEND == "cython" else [])


def suite_oracle(phi=None, w=None) -> SuiteReport:
    report = SuiteReport("oracle")
    start = time.perf_counter()
    phi = SmoothWindow() if phi is None else phi
    w = SECOND_WINDOW if w is None else w
    worst = 0.0
    for X, Y in oracle_grid():
        ref = charsum.mean_square_oracle(X, Y, phi, w).value
        got = charsum.mean_square(X, Y, phi, w).value
        rel = abs(got - ref) / abs(ref) if ref else abs(got)
        worst = max(worst, rel)
        report.check(rel < ORACLE_REL_TOL, f"X={X}, Y={Y}: rel={rel:.3g}")
    report.details["max_relative_error"] = worst

    # many blocks so the thread schedule actually varies
    X, Y = 20000.0, 300.0
    for name in available_backends():
        vals = [charsum.mean_square(X, Y, phi, w, threads=t, backend=name).value for t in THREAD_COUNTS]
        report.check(
            all(v.hex() == vals[0].hex() for v in vals),
            f"{name}: thread counts {THREAD_COUNTS} gave {[v.hex() for v in vals]}",
        )
        report.details[f"threads_{name}"] = vals[0].hex()
    report.elapsed = time.perf_counter() - start
    return report


# -- euler -----------------------------------------------------------------------


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def suite_euler() -> SuiteReport:
    report = SuiteReport("euler")
    start = time.perf_counter()
    P = 10**4
    pairs = {
        "z2_at_half": (euler.z2_at_half(P).value, euler.z2_at_half(2 * P).value),
        "z3_at_zero": (euler.z3_at_zero(1, P).value, euler.z3_at_zero(1, 2 * P).value),
        "c2_a_sum": (euler.c2_a_sum(10**3, P), euler.c2_a_sum(2 * 10**3, 2 * P)),
    }
    for name, (a, b) in pairs.items():
        rel = _rel(b, a)
        report.details[f"{name}_doubling_rel"] = rel
        report.check(rel < EULER_REL_TOL, f"{name}: doubling changes by {rel:.3g}")

    for P0 in (10**3, 10**4):
        for fn in (euler.z2_at_half, lambda c: euler.z3_at_zero(1, c), euler.c2_euler_product):
            v1, v2 = fn(P0), fn(2 * P0)
            d = abs(math.log(v2.value) - math.log(v1.value))
            report.check(d < v1.tail_estimate, f"cutoff {P0}: log change {d:.3g} >= tail {v1.tail_estimate:.3g}")

    direct = euler.c2_a_sum(10**4, 10**5, method="direct")
    accel = euler.c2_a_sum(10**4, 10**5, method="euler")
    report.details["c2_two_route_rel"] = _rel(direct, accel)
    report.check(_rel(direct, accel) < EULER_REL_TOL, f"c2 direct vs euler: {_rel(direct, accel):.3g}")

    for p in TRIPLE_SUM_PRIMES:
        closed = euler.z3_local_factor(p, TRIPLE_SUM_GAMMA)
        triple = euler.z3_local_triple_sum(p, TRIPLE_SUM_GAMMA, TRIPLE_SUM_TRUNCATION)
        report.details[f"triple_sum_p{p}"] = abs(closed - triple)
        report.check(abs(closed - triple) < TRIPLE_SUM_TOL, f"p={p}: triple sum off by {abs(closed - triple):.3g}")

    for p in (3, 5, 7):
        extrap = euler.richardson_limit(lambda g: euler.z3_local_series(p, g), RICHARDSON_GAMMA0, RICHARDSON_LEVELS)
        err = abs(extrap - euler.z3_local_factor_limit(p))
        report.details[f"richardson_p{p}"] = err
        report.check(err < RICHARDSON_TOL, f"p={p}: Richardson limit off by {err:.3g}")

    report.check(
        abs(euler.z2_local_factor(3, 0.5, 0.5) - euler.z2_local_series(3, 0.5, 0.5, 60)) < 1e-12,
        "z2 local factor vs double series at p=3",
    )
    for p in build_sieves(2000).primes(2000, start=101).tolist():
        f2 = euler.z2_local_factor(p, 0.5, 0.5)
        f3 = euler.z3_local_factor_limit(p)
        report.check(0 < f2 and abs(f2 - 1) < 10 / p**2, f"z2 factor at {p}")
        report.check(0 < f3 and abs(f3 - 1) < 10 / p**2, f"z3 factor at {p}")

    bump = SmoothWindow()
    for name, (phi, w) in {"bump_bump": (bump, bump), "bump_shifted": (SECOND_WINDOW, bump)}.items():
        a, b = h1_tilde_half(phi, w), h1_tilde_half_direct(phi, w)
        report.details[f"h1_{name}_rel"] = _rel(a, b)
        report.check(_rel(a, b) < H1_TOL, f"h1 {name}: {_rel(a, b):.3g}")

    c = euler.constants(bump, bump)
    c2 = euler.constants(bump, bump, prime_cutoff=2 * 10**5, a_max=2 * 10**4)
    report.check(c.C1 > 0, "C1 > 0")
    report.check(math.copysign(1, c.C2) == -math.copysign(1, c.c2_sum), "sign(C2) = -sign(c2_sum)")
    report.check(_rel(c2.C1, c.C1) < EULER_REL_TOL and _rel(c2.C2, c.C2) < EULER_REL_TOL, "C1, C2 cutoff stability")
    report.details["C1"] = c.C1
    report.details["C2"] = c.C2
    report.elapsed = time.perf_counter() - start
    return report


_RUNNERS = {
    "gauss": suite_gauss,
    "poisson": suite_poisson,
    "oracle": suite_oracle,
    "euler": suite_euler,
}


def run_suite(name: str) -> list[SuiteReport]:
    if name == "all":
        return [_RUNNERS[s]() for s in SUITES]
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    return [_RUNNERS[name]()]
