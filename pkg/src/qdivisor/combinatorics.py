"""Exact combinatorial coefficients.

Stirling numbers, generalized binomials, Eulerian and Bell polynomials,
generalized divisor sums, negative-order polylogarithms, the A/C/a
coefficient tables and the Q -> N -> P polynomial chain.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

from gmpy2 import mpq

from .scalars import Cyclo, as_scalar


# -- Stirling numbers --------------------------------------------------------

@lru_cache(maxsize=None)
def stirling1(n: int, k: int) -> int:
    """Signed Stirling number of the first kind: sum_k s(n,k) x^k = x(x-1)...(x-n+1)."""
    if n < 0 or k < 0:
        raise ValueError("negative Stirling index")
    if k > n:
        return 0
    if n == 0:
        return 1
    if k == 0:
        return 0
    return stirling1(n - 1, k - 1) - (n - 1) * stirling1(n - 1, k)


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if n < 0 or k < 0:
        raise ValueError("negative Stirling index")
    if k > n:
        return 0
    if n == 0:
        return 1
    if k == 0:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def stirling(kind: str, n: int, k: int) -> int:
    if kind == "first":
        return stirling1(n, k)
    if kind == "second":
        return stirling2(n, k)
    raise ValueError(f"unknown Stirling kind {kind!r}")


# -- binomials ------------------------------------------------------------------

def gen_binom(alpha, n: int):
    """alpha(alpha-1)...(alpha-n+1)/n! for rational alpha."""
    if n < 0:
        raise ValueError("gen_binom needs n >= 0")
    alpha = as_scalar(alpha)
    num = mpq(1)
    for i in range(n):
        num *= alpha - i
    return num / factorial(n)


def rising(x, n: int):
    out = mpq(1)
    for i in range(n):
        out *= x + i
    return out


# -- polynomials over Q --------------------------------------------------------

class Poly:
    """Multivariate polynomial with rational coefficients in ``nvars`` variables."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} does not have {nvars} entries")
            c = mpq(c)
            if c:
                clean[e] = clean.get(e, 0) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def gen(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    def widen(self, nvars: int) -> "Poly":
        if nvars < self.nvars:
            raise ValueError("cannot drop variables")
        pad = (0,) * (nvars - self.nvars)
        return Poly(nvars, {e + pad: c for e, c in self.terms.items()})

    def _align(self, other):
        if isinstance(other, Poly):
            n = max(self.nvars, other.nvars)
            return self.widen(n), other.widen(n)
        return self, Poly.const(self.nvars, other)

    def __add__(self, other):
        a, b = self._align(other)
        out = dict(a.terms)
        for e, c in b.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(a.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else -mpq(other))

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = mpq(other)
            return Poly(self.nvars, {e: v * c for e, v in self.terms.items()})
        a, b = self._align(other)
        out = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(a.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly.const(self.nvars, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            a, b = self._align(other)
            return a.terms == b.terms
        return self == Poly.const(self.nvars, other)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def coeff(self, *exps):
        return self.terms.get(tuple(exps), mpq(0))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def coefficients(self) -> list:
        """Dense coefficient list, univariate only."""
        if self.nvars != 1:
            raise ValueError("dense coefficients need a univariate polynomial")
        d = self.degree()
        return [self.terms.get((i,), mpq(0)) for i in range(d + 1)]

    def derive(self, rule) -> "Poly":
        """Apply the derivation with D(x_i) = rule(i), a Poly."""
        out = Poly(self.nvars)
        for e, c in self.terms.items():
            for i, p in enumerate(e):
                if p:
                    rest = list(e)
                    rest[i] -= 1
                    out = out + Poly(self.nvars, {tuple(rest): c * p}) * rule(i)
        return out

    def __call__(self, *args):
        return self.evaluate(args)

    def evaluate(self, args):
        """Evaluate at scalars, Series or Polys; args[i] replaces variable i."""
        if len(args) != self.nvars:
            raise ValueError(f"expected {self.nvars} arguments, got {len(args)}")
        powers = [dict() for _ in args]

        def pw(i, p):
            cache = powers[i]
            if p not in cache:
                cache[p] = args[i] ** p if p else 1
            return cache[p]

        total = None
        for e, c in sorted(self.terms.items()):
            term = None
            for i, p in enumerate(e):
                if p:
                    term = pw(i, p) if term is None else term * pw(i, p)
            term = c if term is None else term * c
            total = term if total is None else total + term
        return mpq(0) if total is None else total

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), kv[0])):
            mono = "*".join(f"x{i}" + (f"^{p}" if p > 1 else "") for i, p in enumerate(e) if p)
            if mono and c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def univariate(coeffs) -> Poly:
    return Poly(1, {(i,): c for i, c in enumerate(coeffs)})


# -- Eulerian and Bell polynomials -----------------------------------------------

@lru_cache(maxsize=None)
def _eulerian_numbers(m: int) -> tuple:
    if m == 0:
        return (1,)
    prev = _eulerian_numbers(m - 1)
    row = []
    for k in range(m):
        left = prev[k] if k < len(prev) else 0
        right = prev[k - 1] if 1 <= k <= len(prev) else 0
        row.append((k + 1) * left + (m - k) * right)
    return tuple(row)


def eulerian_poly(m: int) -> Poly:
    """A_m(x) with A_m(x)/(1-x)^(m+1) = sum_j (j+1)^m x^j."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return univariate(_eulerian_numbers(m))


def _multiplicity_partitions(m: int, largest: int | None = None):
    """Yield dicts {part: multiplicity} for partitions of m."""
    if largest is None:
        largest = m
    if m == 0:
        yield {}
        return
    for p in range(min(m, largest), 0, -1):
        for rest in _multiplicity_partitions(m - p, p):
            out = dict(rest)
            out[p] = out.get(p, 0) + 1
            yield out


@lru_cache(maxsize=None)
def bell_poly(m: int) -> Poly:
    """Complete exponential Bell polynomial Y_m as a partition sum."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return Poly.const(0, 1)
    terms = {}
    for mult in _multiplicity_partitions(m):
        coeff = mpq(factorial(m))
        exps = [0] * m
        for part, k in mult.items():
            coeff /= factorial(k) * factorial(part) ** k
            exps[part - 1] = k
        terms[tuple(exps)] = coeff
    return Poly(m, terms)


def bell_poly_recursive(m: int) -> Poly:
    """Y_{m+1} = sum_i C(m,i) Y_{m-i} u_{i+1}; only used as a cross-check."""
    polys = [Poly.const(m, 1)]
    for n in range(m):
        acc = Poly(m)
        for i in range(n + 1):
            acc = acc + polys[n - i] * Poly.gen(m, i) * comb(n, i)
        polys.append(acc)
    return polys[m]


# -- divisor sums and polylogarithms ------------------------------------------------

def divisors(n: int) -> list:
    if n < 1:
        raise ValueError("divisors need n >= 1")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def divisor_sigma(m: int, c, n: int):
    """sigma_{m,c}(n) = sum over d | n of d^m c^d."""
    if n < 1:
        raise ValueError("divisor_sigma needs n >= 1")
    c = as_scalar(c)
    total = mpq(0)
    for d in divisors(n):
        total = total + (c ** d) * (d ** m)
    return total


def polylog_neg(m: int, x):
    """Li_{-m}(x) = x A_m(x) / (1-x)^(m+1)."""
    x = as_scalar(x)
    if x == 1:
        raise ZeroDivisionError("Li_{-m} has a pole at x = 1")
    num = x * eulerian_poly(m).evaluate((x,))
    den = (1 - x) ** (m + 1)
    if isinstance(den, Cyclo):
        return num * den.inverse()
    return num / den


# -- A, C and a coefficient tables -------------------------------------------------

def coeff_A(j: int, r: int, t: int):
    """A(j,r,t) = sum_{l=t}^j s(j,l)/j! C(l,t) (1-r)^(l-t)."""
    if t < 0 or t > j:
        return mpq(0)
    total = mpq(0)
    for l in range(t, j + 1):
        total += mpq(stirling1(j, l) * comb(l, t)) * mpq(1 - r) ** (l - t)
    return total / factorial(j)


def coeff_C(k: int, r: int, t: int):
    if t == 0:
        return sum((comb(k - 1, j - 1) * coeff_A(j, r, 0) for j in range(1, k + 1)), mpq(0))
    if t > k:
        return mpq(0)
    return sum((comb(k - 1, j + t - 1) * coeff_A(j + t, r, t) for j in range(0, k - t + 1)), mpq(0))


@dataclass(frozen=True)
class DilcherCoeffTable:
    max_j: int
    max_r: int
    A: dict   # (j, r, t) -> rational, 0 <= t <= j
    C: dict   # (k, r, t) -> rational, 0 <= t <= k

    def a(self, k: int, t: int):
        return self.C[(k, 1, t)]


def dilcher_coeffs(max_j: int = 8, max_r: int = 8) -> DilcherCoeffTable:
    if max_j < 1 or max_r < 1:
        raise ValueError("table bounds must be at least 1")
    A, C = {}, {}
    for r in range(1, max_r + 1):
        for j in range(1, max_j + 1):
            for t in range(j + 1):
                A[(j, r, t)] = coeff_A(j, r, t)
                C[(j, r, t)] = coeff_C(j, r, t)
    return DilcherCoeffTable(max_j, max_r, A, C)


# -- the Q -> N -> P chain ---------------------------------------------------------

def q_coef(h: int, r: int):
    """Q_{h,r}, the coefficient of the h-th divisor series in T_r."""
    if not 0 <= h < r:
        raise ValueError(f"need 0 <= h < r, got h={h}, r={r}")
    sign = -1 if (r + h - 1) % 2 else 1
    total = mpq(0)
    for j in range(r - h):
        total += mpq(sign * comb(r - 1, j) * stirling1(r - j - 1, h), factorial(r - j - 1))
    return total


@lru_cache(maxsize=None)
def n_poly(i: int) -> Poly:
    """N_i with N_1 = x1 and N_{i+1} = x1 N_i + D(N_i), D(x_r) = r x_{r+1}."""
    if i < 1:
        raise ValueError("i must be at least 1")
    if i == 1:
        return Poly.gen(1, 0)
    prev = n_poly(i - 1).widen(i)
    rule = lambda idx: Poly.gen(i, idx + 1) * (idx + 1)
    return Poly.gen(i, 0) * prev + prev.derive(rule)


@lru_cache(maxsize=None)
def p_poly(k: int) -> Poly:
    """P_k(x_0..x_{k-1}) = sum_r C(k-1,k-r)/r! N_r(L_1..L_r), L_r = sum_h Q_{h,r} x_h."""
    if k < 1:
        raise ValueError("k must be at least 1")
    linear = [sum((Poly.gen(k, h) * q_coef(h, r) for h in range(r)), Poly(k)) for r in range(1, k + 1)]
    total = Poly(k)
    for r in range(1, k + 1):
        total = total + n_poly(r).evaluate(tuple(linear[:r])) * mpq(comb(k - 1, k - r), factorial(r))
    return total


def d_coeffs(c: list) -> list:
    """d_0 = c_0 and d_m = m! sum_{k>=m} c_k S2(k,m)."""
    out = [mpq(c[0]) if c else mpq(0)]
    for m in range(1, len(c)):
        out.append(factorial(m) * sum((mpq(c[k]) * stirling2(k, m) for k in range(m, len(c))), mpq(0)))
    return out


def e_coeff(m: int, j: int) -> int:
    return (-1) ** j * comb(m - 1, j)


def limit_coeffs(c) -> list:
    """h_1..h_{K+2} for f(n) = sum c_k n^k."""
    c = [as_scalar(x) for x in c]
    if not c:
        raise ValueError("empty coefficient list")
    K = len(c) - 1
    d = d_coeffs(c)
    h = [d[0]]
    for j in range(2, K + 3):
        total = mpq(0)
        for i in range(max(j - 1, 1), K + 1):
            total += (-1) ** (i - j + 1) * comb(i - 1, j - 2) * d[i]
        h.append(total)
    return h
