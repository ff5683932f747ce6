import math

import gmpy2
import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realchar.arith import build_sieves, euler_phi, is_odd_square
from realchar.gauss import NAIVE_MAX_K, RadicalValue, gauss_exact, gauss_naive, gauss_naive_many


def definitional(m, k):
    """High-precision definitional sum with an independent Jacobi symbol."""
    s = mpmath.fsum(gmpy2.jacobi(a, k) * mpmath.expjpi(2 * mpmath.mpf(a * m) / k) for a in range(k))
    pref = (1 - 1j) / 2 + gmpy2.jacobi(-1, k) * (1 + 1j) / 2
    return complex(pref * s)


def test_naive_examples():
    assert gauss_naive(5, 1) == pytest.approx(1)
    assert gauss_naive(1, 3) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert gauss_naive(3, 9) == pytest.approx(-3, abs=1e-12)


@pytest.mark.parametrize("k", [1, 3, 5, 9, 15, 21, 25, 27, 45, 105])
def test_naive_matches_definition(k):
    for m in range(-12, 13):
        assert abs(gauss_naive(m, k) - definitional(m, k)) < 1e-10


def test_naive_cap():
    with pytest.raises(ValueError):
        gauss_naive(1, NAIVE_MAX_K + 2)
    with pytest.raises(ValueError):
        gauss_naive(1, 4)


def test_exact_examples():
    assert gauss_exact(0, 9) == RadicalValue(6, 1)
    assert gauss_exact(2, 9) == RadicalValue(0)
    assert gauss_exact(1, 15) == RadicalValue(1, 15)
    assert gauss_exact(9, 3) == RadicalValue(0)


def test_radical_value_algebra():
    assert RadicalValue(0, 7) == RadicalValue(0, 1)
    assert RadicalValue(2, 6) * RadicalValue(3, 10) == RadicalValue(12, 15)
    assert RadicalValue.from_parts(1, 12) == RadicalValue(2, 3)
    assert float(RadicalValue(-3, 5)) == pytest.approx(-3 * math.sqrt(5))
    assert RadicalValue(2, 3).squared() == 12
    with pytest.raises(ValueError):
        RadicalValue(1, 0)


@given(st.integers(-60, 60), st.integers(0, 400))
@settings(max_examples=400)
def test_exact_matches_naive(m, j):
    k = 2 * j + 1
    z = gauss_naive(m, k)
    assert abs(z.real - float(gauss_exact(m, k))) < 1e-6 * max(1.0, math.sqrt(k))
    assert abs(z.imag) < 1e-9 * k


def test_naive_many_matches_single():
    ms = list(range(-7, 8))
    many = gauss_naive_many(ms, 45)
    for m, z in zip(ms, many):
        assert abs(z - gauss_naive(m, 45)) < 1e-12


def test_four_torsion():
    t = build_sieves(1000)
    for n in range(1, 1001, 2):
        for j in range(-100, 101):
            assert gauss_exact(j, n, t) == gauss_exact(4 * j, n, t)


def test_magnitude_bound():
    t = build_sieves(2000)
    for k in range(1, 2000, 2):
        for m in range(-30, 31):
            assert gauss_exact(m, k, t).squared() <= k * k


def test_zero_row_detects_squares():
    t = build_sieves(10**4)
    for k in range(1, 10**4 + 1, 2):
        want = euler_phi(k, t) if is_odd_square(k) else 0
        assert gauss_exact(0, k, t) == RadicalValue(want)
