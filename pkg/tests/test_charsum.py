import math

import gmpy2
import numpy as np
import pytest

from realchar import charsum
from realchar.charsum import (
    OracleBudgetError,
    inner_sum,
    mean_square,
    mean_square_oracle,
    poisson_check,
)

# mpmath (30 digits) with gmpy2 Kronecker symbols, frozen
INNER_1_10 = -0.0182857482116846174026000876637
INNER_5_50 = -0.0428423813641237122310358792958
S_20_5 = 1.14967119883623270072276840049e-05


def test_inner_sum_examples(bump):
    assert inner_sum(7, 1, bump) == 0
    assert inner_sum(1, 10, bump) == pytest.approx(INNER_1_10, rel=1e-13)
    assert inner_sum(5, 50, bump) == pytest.approx(INNER_5_50, rel=1e-13)
    with pytest.raises(ValueError):
        inner_sum(9, 10, bump)


def test_inner_sum_against_gmpy2(shifted):
    Y = 137.3
    for d in (1, 3, 7, 15, 101, 1155):
        want = math.fsum(gmpy2.kronecker(8 * d, n) * float(shifted(n / Y)) for n in range(1, 138))
        assert inner_sum(d, Y, shifted) == pytest.approx(want, abs=1e-14)


def test_oracle_examples(bump):
    r = mean_square_oracle(1, 100, bump, bump)
    assert r.value == 0 and r.d_count == 0
    r = mean_square_oracle(20, 5, bump, bump)
    assert r.d_count == 9
    assert r.value == pytest.approx(S_20_5, rel=1e-13)
    assert mean_square_oracle(137.5, 61.3, bump, bump.scaled(2)).value == pytest.approx(
        2 * mean_square_oracle(137.5, 61.3, bump, bump).value, rel=1e-15
    )


def test_oracle_budget(bump):
    with pytest.raises(OracleBudgetError):
        mean_square_oracle(1e5, 1e4, bump, bump)


@pytest.mark.parametrize("X, Y", [(20, 5), (500, 200), (137.5, 61.3), (311, 33.3)])
def test_sieved_matches_oracle(bump, shifted, X, Y):
    ref = mean_square_oracle(X, Y, shifted, bump).value
    got = mean_square(X, Y, shifted, bump)
    assert abs(got.value - ref) <= 1e-9 * ref
    assert got.value >= 0
    assert got.d_count <= X / 2 + 1


def test_mean_square_trivial(bump):
    assert mean_square(1, 50, bump, bump).value == 0


def test_y_beyond_support_is_inert(bump):
    # phi vanishes beyond n = Y, so summing up to 2Y changes nothing
    a = mean_square(3000, 250, bump, bump)
    b = mean_square(3000, 250, bump, bump, n_limit=500)
    assert a.value == b.value


def test_precision_guard(bump):
    with pytest.raises(ValueError):
        mean_square(2.0**40, 2.0**8, bump, bump)


def test_active_d_matches_definition(shifted):
    ds, wts = charsum.active_d(400, shifted)
    want = [d for d in range(1, 400, 2) if charsum.is_squarefree(d) and shifted(d / 400) > 0]
    assert ds.tolist() == want
    assert np.all(wts > 0)


@pytest.mark.parametrize("n, X", [(1, 100), (9, 50), (15, 200), (199, 1000)])
def test_poisson_examples(bump, n, X):
    r = poisson_check(n, X, bump)
    assert r.abs_error < 1e-6
    assert r.tail_bound < 1e-8
    if n == 1:
        want = math.fsum(float(bump(d / X)) for d in range(1, int(X), 2))
        assert r.lhs == pytest.approx(want, rel=1e-14)


def test_poisson_rejects_even_modulus(bump):
    with pytest.raises(ValueError):
        poisson_check(4, 100, bump)


def test_poisson_tail_limit(bump):
    with pytest.raises(ValueError):
        poisson_check(199, 100, bump, k_max=1)
