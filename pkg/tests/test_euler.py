import math
from fractions import Fraction

import mpmath
import pytest
import sympy

from realchar import euler
from realchar.gauss import gauss_prime_power

# 30-digit oracle: per-prime logs up to 1000, then the Taylor series of
# log f(x) summed against prime zeta values P(k) - sum_{p <= 1000} p^-k, k <= 40
Z2_HALF = 0.0685869287868613921322299028011
Z3_ZERO_1 = 0.0622224904627246795208592897484
C2_SUM = 0.0555944704566202087599762881686


def z2_series(p, u, v):
    """Local factor from the double series, summed by mpmath."""
    w = mpmath.mpf(p) / (p + 1)
    s = 1 + w * mpmath.nsum(
        lambda n1, n2: p ** (-(n1 * u + n2 * v)) if (n1 + n2) % 2 == 0 and n1 + n2 > 0 else 0,
        [0, mpmath.inf],
        [0, mpmath.inf],
    )
    return float((1 - p ** (-2 * u)) * (1 - p ** (-2 * v)) * (1 - mpmath.mpf(p) ** (-(u + v))) * s)


def test_z2_local_factor_at_three():
    assert euler.z2_local_factor(3, 0.5, 0.5) == pytest.approx(20 / 27, rel=1e-15)
    assert abs(euler.z2_local_series(3, 0.5, 0.5, 60) - 20 / 27) < 1e-12


@pytest.mark.parametrize("p, u, v", [(3, 0.5, 0.5), (5, 0.6, 0.8), (7, 0.3, 1.1)])
def test_z2_local_factor_matches_series(p, u, v):
    assert euler.z2_local_factor(p, u, v) == pytest.approx(z2_series(p, u, v), rel=1e-12)


def test_z2_local_factor_domain():
    with pytest.raises(ValueError):
        euler.z2_local_factor(2, 0.5, 0.5)
    with pytest.raises(ValueError):
        euler.z2_local_factor(3, 0.25, 0.5)
    with pytest.raises(ValueError):
        euler.z2_local_factor(9, 0.5, 0.5)


def test_local_factors_near_one():
    for p in sympy.primerange(101, 3000):
        for f in (euler.z2_local_factor(p, 0.5, 0.5), euler.z3_local_factor_limit(p)):
            assert 0 < f and abs(f - 1) < 10 / p**2


def test_z2_at_half():
    with pytest.raises(ValueError):
        euler.z2_at_half(999)
    a, b = euler.z2_at_half(10**3), euler.z2_at_half(10**5)
    assert a.value > 0
    assert abs(a.value - b.value) < 1e-6
    assert b.value == pytest.approx(Z2_HALF, rel=1e-9)


def test_z2_raw_is_plain_product():
    P = 2000
    v = euler.z2_at_half(P)
    rest = math.prod(euler.z2_local_factor(p, 0.5, 0.5) for p in sympy.primerange(5, P + 1))
    assert v.raw / (Fraction(1, 8) * Fraction(20, 27)) == pytest.approx(rest, rel=1e-12)


@pytest.mark.parametrize("P", [10**3, 10**4, 10**5])
def test_tail_estimates_bound_true_error(P):
    for v, ref in (
        (euler.z2_at_half(P), Z2_HALF),
        (euler.z3_at_zero(1, P), Z3_ZERO_1),
        (euler.c2_euler_product(P), C2_SUM),
    ):
        assert abs(math.log(v.value) - math.log(ref)) <= v.tail_estimate


@pytest.mark.parametrize("P", [10**3, 10**4])
def test_doubling_within_tail(P):
    for fn in (euler.z2_at_half, lambda c: euler.z3_at_zero(1, c)):
        a, b = fn(P), fn(2 * P)
        assert abs(b.value - a.value) < a.tail_estimate


def test_z3_limit_closed_form():
    assert euler.z3_local_factor_limit(3) == pytest.approx(56 / 81, rel=1e-15)
    for p in (3, 5, 11):
        x = mpmath.mpf(1) / p
        series = (1 - x) ** 3 * (1 + (1 - x) * mpmath.nsum(lambda j: (2 * j + 1) * x**j, [1, mpmath.inf]))
        assert euler.z3_local_factor_limit(p) == pytest.approx(float(series), rel=1e-14)
    p = 1009
    assert abs(euler.z3_local_factor_limit(p) / (1 - 1 / p) ** 3 - 1) < 8 / p
    with pytest.raises(ValueError):
        euler.z3_local_factor_limit(2)


def test_odd_exponent_terms_vanish():
    # G_{p^(2k)}(p^i) for odd i <= 2k is zero, so no half-integer powers of p survive
    for p in (3, 5, 7):
        for k in range(1, 6):
            for i in range(1, 2 * k + 1, 2):
                assert not gauss_prime_power(p ** (2 * k), p, i)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_prelimit_against_triple_sum(p):
    closed = euler.z3_local_factor(p, 0.25)
    assert abs(closed - euler.z3_local_triple_sum(p, 0.25, 60)) < 1e-10
    assert abs(closed - euler.z3_local_series(p, 0.25)) < 1e-13


def test_richardson_recovers_limit():
    got = euler.richardson_limit(lambda g: euler.z3_local_series(3, g), 0.05, 6)
    assert abs(got - euler.z3_local_factor_limit(3)) < 1e-8
    assert euler.richardson_limit(lambda h: 2 + 3 * h - h**2, 0.5, 3) == pytest.approx(2, abs=1e-14)


def test_z3_at_zero():
    P = 10**4
    one, three = euler.z3_at_zero(1, P), euler.z3_at_zero(3, P)
    ratio = euler.z3_nongeneric_factor(3) / euler.z3_local_factor_limit(3)
    assert three.value / one.value == pytest.approx(ratio, rel=1e-14)
    assert abs(euler.z3_at_zero(1, 2 * P).value - one.value) < 1e-7
    assert one.value == pytest.approx(Z3_ZERO_1, rel=1e-7)
    for bad in (0, 2, 9, 45):
        with pytest.raises(ValueError):
            euler.z3_at_zero(bad, P)


def test_z3_raw_is_plain_product():
    P = 1000
    z1 = euler.z3_at_zero(1, P)
    prod = 0.125 * math.prod(euler.z3_local_factor_limit(p) for p in sympy.primerange(3, P + 1))
    assert z1.raw == pytest.approx(prod, rel=1e-12)


def test_c2_a_sum():
    P = 10**4
    assert euler.c2_a_sum(1, P, method="direct") == pytest.approx(euler.z3_at_zero(1, P).value, rel=1e-15)
    want = euler.z3_at_zero(1, P).value - euler.z3_at_zero(3, P).value / 9
    assert euler.c2_a_sum(3, P, method="direct") == pytest.approx(want, rel=1e-15)
    direct = euler.c2_a_sum(10**4, P, method="direct")
    accel = euler.c2_a_sum(10**4, P)
    assert abs(direct - accel) < 1e-6 * accel
    assert accel == pytest.approx(C2_SUM, rel=1e-7)
    with pytest.raises(ValueError):
        euler.c2_a_sum(10, P, method="guess")
    with pytest.raises(ValueError):
        euler.c2_a_sum(0, P)


def test_constants(bump, shifted):
    c = euler.constants(bump, bump)
    assert c.C1 > 0
    assert math.copysign(1, c.C2) == -math.copysign(1, c.c2_sum)
    d = euler.constants(bump, bump, prime_cutoff=2 * 10**5, a_max=2 * 10**4)
    assert abs(d.C1 - c.C1) < 1e-6 * c.C1
    assert abs(d.C2 - c.C2) < 1e-6 * abs(c.C2)
    e = euler.constants(bump.scaled(2), bump)
    assert e.C1 == pytest.approx(4 * c.C1, rel=1e-13)
    assert e.C2 == pytest.approx(4 * c.C2, rel=1e-13)


def test_constants_cancel(bump, shifted):
    # (1 - p^-2) times the Z_2 factor equals the generic Z_3 factor minus
    # p^-2 times the non-generic one, so Z_2 / pi^2 = c2_sum / 8 exactly
    for phi, w in ((bump, bump), (shifted, bump)):
        c = euler.constants(phi, w)
        assert abs(c.C1 + c.C2) < 1e-12 * c.C1
    for p in (3, 5, 7, 101):
        x = 1 / p
        lhs = (1 - x * x) * euler.z2_local_factor(p, 0.5, 0.5)
        rhs = euler.z3_local_factor_limit(p) - x * x * euler.z3_nongeneric_factor(p)
        assert lhs == pytest.approx(rhs, rel=1e-14)


def test_predict():
    C1, C2 = 2.0, -0.5
    X = 1000.0
    p = euler.predict(C1, C2, X, X)
    assert p.total == pytest.approx((C1 + C2) * X * X * math.log(X), rel=1e-14)
    p = euler.predict(C1, C2, 10000.0, 100.0)
    assert p.term2 == pytest.approx(0, abs=1e-9)
    assert p.total == pytest.approx(C1 * 1e6 * math.log(100), rel=1e-14)
    p = euler.predict(C1, C2, 5000.0, 100.0)
    q = euler.predict(C1, C2, 2 * 5000.0, 100.0)
    assert p.total == p.term1 + p.term2
    assert q.term2 - 2 * p.term2 == pytest.approx(C2 * 2 * 5000 * 100 * math.log(0.5), rel=1e-12)


@pytest.mark.parametrize("X, Y", [(99.0, 100.0), (10001.0, 100.0), (1.0, 2.0)])
def test_predict_rejects_outside_region(X, Y):
    with pytest.raises(euler.RegionError, match="Y <= X <= Y\\^2"):
        euler.predict(1.0, -1.0, X, Y)
