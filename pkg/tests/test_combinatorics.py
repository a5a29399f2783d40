from fractions import Fraction
from math import comb, factorial

import pytest
from gmpy2 import mpq

from qdivisor.combinatorics import (Poly, bell_poly, bell_poly_recursive, coeff_A, coeff_C, d_coeffs,
                                    dilcher_coeffs, divisor_sigma, divisors, e_coeff, eulerian_poly,
                                    gen_binom, limit_coeffs, n_poly, p_poly, polylog_neg, q_coef, rising,
                                    stirling, stirling1, stirling2)
from qdivisor.series import Series, binom_expand, univariate

TABLE = dilcher_coeffs(8, 6)


def falling_factorial_coeffs(j):
    # coefficients of x(x-1)...(x-j+1), built by repeated multiplication
    c = [1]
    for i in range(j):
        nxt = [0] * (len(c) + 1)
        for k, v in enumerate(c):
            nxt[k + 1] += v
            nxt[k] -= i * v
        c = nxt
    return c


# -- Stirling numbers ------------------------------------------------------------------

def test_stirling_examples():
    assert stirling("first", 3, 2) == -3
    assert stirling("second", 4, 2) == 7
    assert all(stirling1(j, 0) == 0 for j in range(1, 10))
    assert stirling1(0, 0) == stirling2(0, 0) == 1
    assert stirling1(3, 5) == 0 and stirling2(3, 5) == 0


@pytest.mark.parametrize("j", range(0, 11))
def test_stirling_first_matches_falling_factorial(j):
    assert [stirling1(j, k) for k in range(j + 1)] == falling_factorial_coeffs(j)


def test_stirling_orthogonality():
    for j in range(11):
        for i in range(11):
            s = sum(stirling1(j, l) * stirling2(l, i) for l in range(11))
            assert s == (1 if i == j else 0)


# -- generalized binomials ----------------------------------------------------------------

def test_gen_binom():
    assert gen_binom(mpq(7, 3), 0) == 1
    assert gen_binom(mpq(-1, 2), 2) == mpq(3, 8)
    for k in range(11):
        for n in range(11):
            assert gen_binom(k + n - 1, k) == (comb(k + n - 1, k) if k + n - 1 >= 0 else (1 if k == 0 else 0))


def test_pascal_oracle():
    for k in range(1, 11):
        for n in range(1, 11):
            assert gen_binom(k + n - 1, k) == gen_binom(k + n - 2, k) + gen_binom(k + n - 2, k - 1)


def test_rising():
    assert rising(mpq(1, 2), 3) == mpq(1, 2) * mpq(3, 2) * mpq(5, 2)


# -- Eulerian and Bell ---------------------------------------------------------------------

def test_eulerian_examples():
    assert eulerian_poly(1).coefficients() == [1]
    assert eulerian_poly(2).coefficients() == [1, 1]
    assert eulerian_poly(3).coefficients() == [1, 4, 1]


@pytest.mark.parametrize("m", range(1, 9))
def test_eulerian_properties(m):
    c = eulerian_poly(m).coefficients()
    assert c == c[::-1]
    assert sum(c) == factorial(m)
    spec = univariate(15)
    A = Series(spec, {(i,): v for i, v in enumerate(c)})
    gen = A * binom_expand(Series.var(spec, "q"), m + 1)
    assert gen == Series(spec, {(j,): (j + 1) ** m for j in range(16)})


def test_bell_examples():
    assert bell_poly(1) == Poly.gen(1, 0)
    u1, u2, u3 = (Poly.gen(3, i) for i in range(3))
    assert bell_poly(2) == u1 ** 2 + u2
    assert bell_poly(3) == u1 ** 3 + u1 * u2 * 3 + u3


@pytest.mark.parametrize("m", range(1, 8))
def test_bell_recurrence_cross_check(m):
    assert bell_poly(m) == bell_poly_recursive(m)


# -- divisor sums and polylogarithms ----------------------------------------------------------

def test_divisor_sigma_examples():
    assert divisor_sigma(0, 1, 6) == 4
    assert divisor_sigma(1, 1, 6) == 12
    for m in range(4):
        assert divisor_sigma(m, mpq(-2, 7), 1) == mpq(-2, 7)
    with pytest.raises(ValueError):
        divisor_sigma(1, 1, 0)


def test_divisor_sigma_brute_force():
    for n in range(1, 501):
        ds = [d for d in range(1, n + 1) if n % d == 0]
        assert divisors(n) == ds
        for m in range(5):
            assert divisor_sigma(m, 1, n) == sum(d ** m for d in ds)


def test_polylog_examples():
    assert polylog_neg(0, mpq(1, 2)) == 1
    assert polylog_neg(1, mpq(1, 2)) == 2
    with pytest.raises(ZeroDivisionError):
        polylog_neg(2, 1)


@pytest.mark.parametrize("x", [Fraction(1, 2), Fraction(1, 3), Fraction(-2, 5)])
@pytest.mark.parametrize("m", range(0, 6))
def test_polylog_partial_sums(x, m):
    # 60 terms leave a tail above 1e-10 only for m=5, x=1/2; take more terms there
    terms = 60 if 61 ** m * abs(float(x)) ** 61 < 1e-11 else 120
    partial = sum(Fraction(k ** m) * x ** k for k in range(1, terms + 1))
    assert abs(float(polylog_neg(m, mpq(x)) - mpq(partial))) < 1e-10


# -- A, C and a tables -----------------------------------------------------------------------

def test_dilcher_examples():
    assert TABLE.a(1, 1) == 1
    assert TABLE.a(2, 1) == mpq(1, 2) and TABLE.a(2, 2) == mpq(1, 2)
    for j in range(1, 9):
        for t in range(j + 1):
            assert TABLE.A[(j, 1, t)] == mpq(stirling1(j, t), factorial(j))


def test_diagonal_and_r1_collapse():
    for k in range(1, 9):
        for r in range(1, 7):
            assert TABLE.C[(k, r, k)] == TABLE.A[(k, r, k)] == mpq(1, factorial(k))
        assert sum(TABLE.a(k, t) for t in range(1, k + 1)) == 1
        assert all(TABLE.a(k, t) == TABLE.C[(k, 1, t)] for t in range(k + 1))
    for j in range(2, 9):
        assert sum(stirling1(j, t) for t in range(1, j + 1)) == 0


def test_a_recurrence():
    for r in range(1, 7):
        for j in range(1, 8):
            for t in range(0, j):
                assert coeff_A(j, r, t) == (j + 1) * coeff_A(j + 1, r, t + 1) + (r + j - 1) * coeff_A(j, r, t + 1)


def test_c_recurrence():
    for r in range(1, 7):
        for k in range(1, 8):
            for t in range(0, k + 1):
                lhs = coeff_C(k + 1, r, t + 1)
                rhs = mpq(k + 1 - r, k + 1) * coeff_C(k, r, t + 1) + mpq(1, k + 1) * coeff_C(k, r, t)
                assert lhs == rhs, (k, r, t)


def test_row_sums():
    for r in range(1, 7):
        for j in range(1, 9):
            want = mpq((-1) ** (j - 1), factorial(j - 1))
            for i in range(r - 1, r + j - 2):
                want *= i
            assert sum(TABLE.A[(j, r, t)] for t in range(1, j + 1)) == want
            want_c = mpq((-1) ** (j - 1), factorial(j - 1))
            for i in range(2, j + 1):
                want_c *= r - i
            assert sum(TABLE.C[(j, r, t)] for t in range(1, j + 1)) == want_c


# -- the Q, N, P chain -------------------------------------------------------------------------

def test_q_coef():
    assert q_coef(0, 1) == 1
    with pytest.raises(ValueError):
        q_coef(3, 3)


def test_n_poly():
    x = [Poly.gen(3, i) for i in range(3)]
    assert n_poly(1) == Poly.gen(1, 0)
    assert n_poly(2) == Poly.gen(2, 0) ** 2 + Poly.gen(2, 1)
    assert n_poly(3) == x[0] ** 3 + x[0] * x[1] * 3 + x[2] * 2


def test_p_poly_first():
    assert p_poly(1) == Poly.gen(1, 0)


# -- limit coefficients --------------------------------------------------------------------------

def test_limit_coeffs_constant():
    assert limit_coeffs([1])[0] == 1 and all(h == 0 for h in limit_coeffs([1])[1:])
    with pytest.raises(ValueError):
        limit_coeffs([])


def test_limit_coeffs_linear():
    h = limit_coeffs([0, 1])
    assert h[0] == 0 and len(h) == 3


def test_limit_coeffs_vanish_beyond_degree():
    for c in ([1], [0, 1], [0, 0, 1], [2, -1, 0, 3]):
        h = limit_coeffs(c)
        assert len(h) == len(c) + 1 and h[-1] == 0


def test_f_generating_function_decomposition():
    # f(n) = n^2: sum f(k) x^k = sum_m d_m sum_j e_{m,j} x/(1-x)^(m+1-j) + c_0 x/(1-x)
    c = [0, 0, 1]
    spec = univariate(20)
    x = Series.var(spec, "q")
    d = d_coeffs(c)
    total = binom_expand(x, 1) * x * c[0]
    for m in range(1, len(c)):
        for j in range(m):
            total = total + (binom_expand(x, m + 1 - j) * x).scale(d[m] * e_coeff(m, j))
    assert total == Series(spec, {(k,): k * k for k in range(1, 21)})
