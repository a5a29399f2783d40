"""Exact scalar fields: rationals (gmpy2 ``mpq``) and cyclotomic fields Q(zeta_N).

Rationals are plain ``mpq`` values. Elements of Q(zeta_N) are :class:`Cyclo`
instances holding the coefficients of a residue modulo the N-th cyclotomic
polynomial. Rationals embed into every Q(zeta_N).
"""
from __future__ import annotations

import cmath
import re
from fractions import Fraction
from functools import lru_cache
from typing import Union

import gmpy2
from gmpy2 import mpq

Rational = type(mpq(0))
_RAT_TYPES = (int, Fraction, Rational)
_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def as_scalar(x):
    """Normalise ints, Fractions, ``"p/q"`` strings and mpq to mpq; Cyclo passes through."""
    if isinstance(x, Cyclo):
        return x
    if isinstance(x, Rational):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (int, Fraction)):
        return mpq(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def parse_rational(text: str):
    """Parse ``"num/den"`` or an integer literal. Decimal notation is rejected."""
    m = _RATIONAL_RE.match(text)
    if not m:
        raise ValueError(f"not a rational in num/den form: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return mpq(num, den)


def format_rational(x) -> str:
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rational_power(x, alpha):
    """Exact ``x**alpha`` for rational alpha; raises ValueError when irrational."""
    x = as_scalar(x)
    alpha = as_scalar(alpha)
    if isinstance(x, Cyclo):
        raise TypeError("rational_power needs a rational base")
    p, r = int(alpha.numerator), int(alpha.denominator)
    if x == 0:
        if p > 0:
            return mpq(0)
        raise ZeroDivisionError("0 raised to a non-positive power")
    if r == 1:
        return x ** p
    if x < 0:
        raise ValueError(f"{x}^{alpha} is not real")
    num, exact_n = gmpy2.iroot(gmpy2.mpz(x.numerator), r)
    den, exact_d = gmpy2.iroot(gmpy2.mpz(x.denominator), r)
    if not (exact_n and exact_d):
        raise ValueError(f"{x}^{alpha} is irrational")
    return mpq(num, den) ** p


# -- cyclotomic polynomials -------------------------------------------------

def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        coef = num[i + len(den) - 1] // lead
        out[i] = coef
        if coef:
            for j, d in enumerate(den):
                num[i + j] -= coef * d
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients (low to high) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError("cyclotomic order must be positive")
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divexact(poly, list(cyclotomic_poly(d)))
    return tuple(poly)


def _reduce(n: int, coeffs: list) -> tuple:
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    c = [mpq(x) for x in coeffs]
    for i in range(len(c) - 1, deg - 1, -1):
        top = c[i]
        if top:
            for j in range(deg):
                c[i - deg + j] -= top * phi[j]
        c[i] = mpq(0)
    c = c[:deg] + [mpq(0)] * max(0, deg - len(c))
    return tuple(c)


def _poly_trim(p: list) -> list:
    while p and not p[-1]:
        p.pop()
    return p


def _poly_divmod(a: list, b: list):
    a = list(a)
    q = [mpq(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        coef = a[i + len(b) - 1] * inv_lead
        q[i] = coef
        if coef:
            for j, bj in enumerate(b):
                a[i + j] -= coef * bj
    return q, _poly_trim(a[: len(b) - 1])


def _poly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _poly_trim([mpq(x) for x in out])


class Cyclo:
    """An element of Q(zeta_N), reduced modulo the N-th cyclotomic polynomial."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs):
        self.n = int(n)
        self.coeffs = _reduce(self.n, list(coeffs))

    @classmethod
    def zeta(cls, n: int, k: int = 1) -> "Cyclo":
        k %= n
        c = [0] * (k + 1)
        c[k] = 1
        return cls(n, c)

    @classmethod
    def embed(cls, n: int, x) -> "Cyclo":
        return cls(n, [as_scalar(x)])

    def _coerce(self, other):
        if isinstance(other, Cyclo):
            if other.n != self.n:
                raise ValueError(f"mismatched cyclotomic orders {self.n} and {other.n}")
            return other
        if isinstance(other, _RAT_TYPES):
            return Cyclo(self.n, [mpq(other)])
        return None

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_rational(self):
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.coeffs[0]

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclo(self.n, [x + y for x, y in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.n, [-x for x in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclo(self.n, [x - y for x, y in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, _RAT_TYPES):
            s = mpq(other)
            return Cyclo(self.n, [x * s for x in self.coeffs])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclo(self.n, _poly_mul(list(self.coeffs), list(o.coeffs)))

    __rmul__ = __mul__

    def inverse(self) -> "Cyclo":
        if not self:
            raise ZeroDivisionError("inverse of zero in Q(zeta_N)")
        if self.is_rational():
            return Cyclo(self.n, [1 / self.coeffs[0]])
        # extended Euclid: s*self + t*phi = g (a nonzero constant)
        r0 = [mpq(c) for c in cyclotomic_poly(self.n)]
        r1 = _poly_trim(list(self.coeffs))
        s0, s1 = [], [mpq(1)]
        while len(r1) > 1:
            quo, rem = _poly_divmod(r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(quo, s1))
        return Cyclo(self.n, [c / r1[0] for c in s1])

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclo(self.n, [1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Cyclo):
            if other.n == self.n:
                return self.coeffs == other.coeffs
            return self.is_rational() and other.is_rational() and self.coeffs[0] == other.coeffs[0]
        if isinstance(other, _RAT_TYPES):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.n, self.coeffs))

    def to_complex(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.n)
        return sum(float(c) * z ** i for i, c in enumerate(self.coeffs))

    def __repr__(self):
        parts = [f"{format_rational(c)}*z^{i}" if i else format_rational(c)
                 for i, c in enumerate(self.coeffs) if c]
        return f"Cyclo[{self.n}](" + (" + ".join(parts) or "0") + ")"


Scalar = Union[Rational, Cyclo]


def is_zero(x) -> bool:
    return not x


def to_complex(x) -> complex:
    if isinstance(x, Cyclo):
        return x.to_complex()
    return complex(float(x))


def scalar_arith(op: str, x, y=None):
    """Field operations on exact scalars: add, mul, neg, inv, eq."""
    x = as_scalar(x)
    if op == "neg":
        return -x
    if op == "inv":
        if not x:
            raise ZeroDivisionError("inverse of zero")
        return x.inverse() if isinstance(x, Cyclo) else 1 / x
    if y is None:
        raise ValueError(f"operation {op!r} needs two operands")
    y = as_scalar(y)
    if isinstance(x, Cyclo) and isinstance(y, Cyclo) and x.n != y.n:
        raise ValueError(f"mismatched cyclotomic orders {x.n} and {y.n}")
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "eq":
        return x == y if not isinstance(y, Cyclo) else y == x
    raise ValueError(f"unknown scalar operation {op!r}")


def scalar_to_json(x):
    if isinstance(x, Cyclo):
        return {"N": x.n, "coefficients": [[str(c.numerator), str(c.denominator)] for c in x.coeffs]}
    x = mpq(x)
    return [str(x.numerator), str(x.denominator)]
