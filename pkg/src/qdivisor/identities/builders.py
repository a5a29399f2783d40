"""Series constructions shared by several identities.

Every outer summation stops once the summand's lowest combined degree
exceeds the truncation bound; the comment on each builder gives that degree.
"""
from __future__ import annotations

from math import comb, factorial

from gmpy2 import mpq

from ..combinatorics import (bell_poly, divisors, eulerian_poly, gen_binom, p_poly,
                             polylog_neg)
from ..scalars import as_scalar
from ..series import (INFINITY, ParamMonomial, Series, VarSpec, binom_expand, pochhammer,
                      one_minus)


def qpow(spec: VarSpec, e: int, coeff=1) -> Series:
    return Series.monomial(spec, coeff, q=e) if e <= spec.nq else Series.zero(spec)


def inv_power(spec: VarSpec, x: Series, alpha) -> Series:
    """(1 - x)^(-alpha)."""
    return binom_expand(x, alpha)


def geometric_weight(c, n: int):
    return as_scalar(c) ** n


# -- Uchimura-type sums --------------------------------------------------------

def uchimura_type(spec: VarSpec, weight, c=1, start: int = 1) -> Series:
    """sum_{n>=start} weight(n) c^n q^n (q^{n+1})_inf.  Degree of the n-th term: n."""
    c = as_scalar(c)
    total = Series.zero(spec)
    tail = Series.one(spec)                 # (q^{n+1})_inf, built from the top down
    for n in range(spec.nq, 0, -1):
        if n >= start:
            w = as_scalar(weight(n))
            if w:
                total = total + tail.shift(w * c ** n, q=n)
        tail = tail - tail.shift(1, q=n)
    return total


def uchimura_moment(spec: VarSpec, m: int, c=1, start: int = 1) -> Series:
    """U_{m,start} with weight c^n, i.e. the tail of M_{m,c}."""
    return uchimura_type(spec, lambda n: mpq(n) ** m, c, start)


def qq_inf(spec: VarSpec) -> Series:
    return pochhammer(ParamMonomial(1, 1), INFINITY, spec)


def moment_via_quotient(spec: VarSpec, m: int) -> Series:
    """(q)_inf sum_n n^m q^n / (q)_n, an independent route to M_m."""
    total = Series.zero(spec)
    inv = Series.one(spec)
    for n in range(1, spec.nq + 1):
        inv = inv / one_minus(ParamMonomial(1, n), spec)
        total = total + inv.shift(mpq(n) ** m, q=n)
    return qq_inf(spec) * total


# -- divisor-type sums ---------------------------------------------------------

def sigma_series(spec: VarSpec, m: int, c=1, aux: str | None = None) -> Series:
    """sum_N sigma_{m,c}(N) q^N, with c^d replaced by (c*aux)^d when aux is given."""
    c = as_scalar(c)
    terms = {}
    ai = spec.index(aux) if aux else None
    for N in range(1, spec.nq + 1):
        for d in divisors(N):
            e = [0] * spec.nvars
            e[0] = N
            if ai is not None:
                e[ai] = d
                if N + d > spec.nt:
                    continue
            key = tuple(e)
            terms[key] = terms.get(key, 0) + (c ** d) * d ** m
    return Series(spec, terms)


def polylog_series(spec: VarSpec, m: int, c=1, aux: str | None = None) -> Series:
    """Li_{-m}(c * aux) as a power series in aux, or the exact constant when aux is None."""
    if aux is None:
        return Series.const(spec, polylog_neg(m, c))
    c = as_scalar(c)
    ai = spec.index(aux)
    terms = {}
    for k in range(1, spec.nt + 1):
        e = [0] * spec.nvars
        e[ai] = k
        terms[tuple(e)] = (c ** k) * k ** m
    return Series(spec, terms)


def frak_s(spec: VarSpec, m: int, a: ParamMonomial | None, c=1) -> Series:
    """S_{m,c} - Li_{-m}(ac) - S_{m,ac}; a is formal or scalar, None means a = 0."""
    s = sigma_series(spec, m, c)
    if a is None:
        return s
    if a.aux:
        name = a.aux[0][0]
        ac = a.coeff * as_scalar(c)
        return s - polylog_series(spec, m, ac, name) - sigma_series(spec, m, ac, name)
    ac = a.coeff * as_scalar(c)
    if ac == 0:
        return s
    return s - polylog_series(spec, m, ac) - sigma_series(spec, m, ac)


def bell_side(spec: VarSpec, m: int, c=1) -> Series:
    """Y_m(K_{1,c}, ..., K_{m,c}) with K_{j,c} = sum sigma_{j-1,c}(n) q^n."""
    ks = [sigma_series(spec, j - 1, c) for j in range(1, m + 1)]
    return bell_poly(m).evaluate(tuple(ks))


def c_quotient(spec: VarSpec, c, s: Series | None = None) -> Series:
    """(q)_inf / (cq)_inf, times s when given."""
    if s is None:
        s = Series.one(spec)
    return div_poch(mul_poch(s, ParamMonomial(1, 1)), ParamMonomial(c, 1))


# -- Ramanujan-type sums ---------------------------------------------------------

def alternating_sum(spec: VarSpec, qexp, extra, den_shift: int = 0) -> Series:
    """sum_{n>=1} (-1)^(n-1) q^{qexp(n)} extra(n) / (q)_{n - den_shift}.

    qexp must be increasing; the sum stops once qexp(n) exceeds nq (extra(n)
    and the Pochhammer inverse have nonnegative degree).
    """
    total = Series.zero(spec)
    inv = Series.one(spec)
    n = 1
    while qexp(n) <= spec.nq:
        k = n - den_shift
        if k >= 1:
            inv = inv / one_minus(ParamMonomial(1, k), spec)
        body = inv.shift(1 if n % 2 else -1, q=qexp(n))
        ex = extra(n)
        if ex is not None:
            body = body * ex
        total = total + body
        n += 1
    return total


def v_sum(spec: VarSpec, k, r: int) -> Series:
    """V_{k,r} = sum (-1)^(n-1) q^{C(n,2)+nr} / ((1-q^n)^k (q)_n), k rational allowed."""
    return alternating_sum(spec, lambda n: n * (n - 1) // 2 + n * r,
                           lambda n: binom_expand(qpow(spec, n), k))


def kluyver_ramanujan(spec: VarSpec, c=1) -> Series:
    """sum (-1)^(n-1) c^n q^{n(n+1)/2} / ((1-q^n)(cq)_n)."""
    c = as_scalar(c)
    total = Series.zero(spec)
    base = -Series.one(spec)
    n = 1
    while n * (n + 1) // 2 <= spec.nq:
        base = (base / one_minus(ParamMonomial(c, n), spec)).shift(-c, q=n)
        total = total + base / one_minus(ParamMonomial(1, n), spec)
        n += 1
    return total


def eulerian_ramanujan(spec: VarSpec, m: int, c=1) -> Series:
    """sum (-1)^(n-1) q^{C(n,2)} cq^n A_m(cq^n) / ((1-cq^n)^(m+1) (q)_{n-1})."""
    c = as_scalar(c)
    A = eulerian_poly(m)

    def extra(n):
        x = qpow(spec, n, c)
        return A.evaluate((x,)) * binom_expand(x, m + 1) * c

    return alternating_sum(spec, lambda n: n * (n - 1) // 2 + n, extra, den_shift=1)


# -- products in a formal variable ---------------------------------------------------

def a_over_q_times_qn(spec: VarSpec, a: ParamMonomial, n: int) -> Series:
    """(a/q)_n q^n = q^{n-1} (q - a) (a)_{n-1} for n >= 1 (no negative q-powers)."""
    if n == 0:
        return Series.one(spec)
    head = qpow(spec, 1) - a.as_series(spec)
    return (head * pochhammer(a, n - 1, spec)).shift(1, q=n - 1)


def q_over_a_times_an(spec: VarSpec, a: ParamMonomial, n: int) -> Series:
    """(q/a)_n a^n = prod_{i=1}^n (a - q^i)."""
    out = Series.one(spec)
    for i in range(1, n + 1):
        out = out * (a.as_series(spec) - qpow(spec, i))
        if out.is_zero():
            break
    return out


def gk_ramanujan(spec: VarSpec, a: ParamMonomial, alpha, c=1, den_shift: int = 0) -> Series:
    """sum_{n>=1} (q/a)_n a^n / ((1 - c q^n)^alpha (q)_{n - den_shift}).  Degree of term n: n."""
    c = as_scalar(c)
    total = Series.zero(spec)
    ratio = Series.one(spec)
    aser = a.as_series(spec)
    for n in range(1, spec.nt + 1):
        ratio = ratio * (aser - qpow(spec, n))
        if n - den_shift >= 1:
            ratio = ratio / one_minus(ParamMonomial(1, n - den_shift), spec)
        if ratio.is_zero():
            break
        total = total + ratio * binom_expand(qpow(spec, n, c), alpha)
    return total


def gk_polynomial(spec: VarSpec, k: int, a: ParamMonomial | None, c=1) -> Series:
    """P_k(frak S_{0,a,c}, ..., frak S_{k-1,a,c})."""
    args = tuple(frak_s(spec, m, a, c) for m in range(k))
    return p_poly(k).evaluate(args)


def gk_uchimura_sum(spec: VarSpec, a: ParamMonomial, weight, c=1) -> Series:
    """sum_{n>=1} weight(n) c^n (a/q)_n q^n / (q)_n.

    Degree of term n: n, or n - 1 when a is a scalar.
    """
    c = as_scalar(c)
    total = Series.zero(spec)
    ratio = Series.one(spec)              # (a)_{n-1} / (q)_n
    head = qpow(spec, 1) - a.as_series(spec)
    for n in range(1, spec.nt + 2):
        if n >= 2:
            ratio = ratio * one_minus(a.shifted(n - 2), spec)
        ratio = ratio / one_minus(ParamMonomial(1, n), spec)
        w = as_scalar(weight(n))
        if w:
            total = total + (head * ratio).shift(w * c ** n, q=n - 1)
    return total


def gk_uchimura(spec: VarSpec, a: ParamMonomial, weight) -> Series:
    """(q)_inf/(a)_inf sum_{n>=1} weight(n) (a/q)_n q^n / (q)_n."""
    s = gk_uchimura_sum(spec, a, weight)
    return div_poch(mul_poch(s, ParamMonomial(1, 1)), a)


def mul_poch(s: Series, x: ParamMonomial, n=INFINITY) -> Series:
    """s * (x; q)_n, one factor at a time."""
    i = 0
    while n == INFINITY or i < n:
        f = x.shifted(i)
        if not s.spec.contains(f.exponents(s.spec)) or f.coeff == 0:
            break
        s = s - s * f.as_series(s.spec)
        i += 1
    return s


def div_poch(s: Series, x: ParamMonomial, n=INFINITY) -> Series:
    """s / (x; q)_n, one factor at a time."""
    i = 0
    while n == INFINITY or i < n:
        f = x.shifted(i)
        if not s.spec.contains(f.exponents(s.spec)) or f.coeff == 0:
            break
        s = s / one_minus(f, s.spec)
        i += 1
    return s


# -- T_{r,a,c} and the x-derivative machinery -------------------------------------------

def _inv_one_minus_power(z: Series, r: int) -> Series:
    if z.constant_term():
        return (Series.one(z.spec) - z) ** (-r)
    return binom_expand(z, r)


def t_function(spec: VarSpec, r: int, a: ParamMonomial | None, c, x: Series | None = None) -> Series:
    """T_{r,a,c}(x, q); x defaults to 1 and may be a series such as 1 + y."""
    c = as_scalar(c)
    if x is None:
        x = Series.one(spec)
    total = Series.zero(spec)
    for n in range(1, spec.nq // r + 1):
        z = x.shift(c, q=n)
        total = total + _inv_one_minus_power(z, r).shift(c ** r, q=n * r)
    if a is not None:
        ac = a.scaled(c)
        for n in range(0, spec.nq + 1):
            mono = ac.shifted(n).as_series(spec)
            numer = mono ** r
            if numer.is_zero():
                break
            total = total - numer * _inv_one_minus_power(x * mono, r)
    return total


def x_quotient(spec: VarSpec, a: ParamMonomial, c, x: Series) -> Series:
    """(x a c)_inf / (x c q)_inf for a series x with nonzero constant term."""
    c = as_scalar(c)
    out = Series.one(spec)
    ac = a.scaled(c)
    for i in range(0, spec.nq + 1):
        f = x * ac.shifted(i).as_series(spec)
        if f.is_zero():
            break
        out = out - out * f
    for i in range(1, spec.nq + 1):
        f = x.shift(c, q=i)
        if f.is_zero():
            break
        out = out / (Series.one(spec) - f)
    return out


def taylor_coefficient(series_in_y: Series, y: str, r: int) -> Series:
    """r! times the y^r coefficient: the r-th derivative at y = 0."""
    return series_in_y.slice(y, r).scale(factorial(r))


def chu_lhs(spec: VarSpec, k: int) -> Series:
    return Series(spec, {(n,) + (0,) * (spec.nvars - 1): comb(k + n - 1, k) for n in range(spec.nq + 1)})


def chu_rhs(spec: VarSpec, k: int) -> Series:
    terms = {}
    for n in range(spec.nq + 1):
        terms[(n,) + (0,) * (spec.nvars - 1)] = sum(comb(n, r) * comb(k - 1, k - r) for r in range(1, k + 1))
    return Series(spec, terms)
