"""Truncated multivariate power series in q and up to two auxiliary variables.

A series lives over a :class:`VarSpec`: an ordered tuple of variable names
(``q`` first), a q-degree bound ``nq`` and a total-degree bound ``nt``.  Only
monomials with q-exponent <= nq and exponent sum <= nt are stored.  Products
truncate eagerly, which is exact because no exponent is ever negative.

Internally each exponent tuple is packed into one integer with a radix wide
enough that adding two in-bounds tuples never carries; the public API always
speaks exponent tuples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from gmpy2 import mpq

from .scalars import Cyclo, as_scalar, scalar_to_json, to_complex

MAX_AUX = 2
INFINITY = math.inf


@dataclass(frozen=True)
class VarSpec:
    names: tuple[str, ...]
    nq: int
    nt: int

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names or names[0] != "q":
            raise ValueError("q must be the first variable")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if len(names) - 1 > MAX_AUX:
            raise ValueError(f"at most {MAX_AUX} auxiliary variables, got {names[1:]}")
        if self.nq < 0 or self.nt < 0:
            raise ValueError("degree bounds must be nonnegative")
        if self.nq > self.nt:
            raise ValueError(f"nq={self.nq} exceeds nt={self.nt}")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"variable {name!r} not in {self.names}") from None

    def with_names(self, names) -> "VarSpec":
        return VarSpec(tuple(names), self.nq, self.nt)

    def with_bounds(self, nq=None, nt=None) -> "VarSpec":
        return VarSpec(self.names, self.nq if nq is None else nq, self.nt if nt is None else nt)

    def contains(self, exps) -> bool:
        return exps[0] <= self.nq and sum(exps) <= self.nt and min(exps) >= 0


@dataclass(frozen=True)
class _Layout:
    base: int
    valid: frozenset
    order: tuple          # valid keys, ascending
    total: dict           # key -> total degree
    decode: dict          # key -> exponent tuple


@lru_cache(maxsize=64)
def _layout(spec: VarSpec) -> _Layout:
    base = 2 * spec.nt + 2
    nv = spec.nvars
    decode = {}
    total = {}

    def rec(prefix, remaining):
        if len(prefix) == nv:
            key = sum(e * base ** i for i, e in enumerate(prefix))
            decode[key] = tuple(prefix)
            total[key] = sum(prefix)
            return
        hi = remaining if prefix else min(spec.nq, remaining)
        for e in range(hi + 1):
            rec(prefix + [e], remaining - e)

    rec([], spec.nt)
    return _Layout(base, frozenset(decode), tuple(sorted(decode)), total, decode)


def _encode(spec: VarSpec, exps) -> int:
    base = _layout(spec).base
    return sum(int(e) * base ** i for i, e in enumerate(exps))


class Series:
    """An immutable truncated power series."""

    __slots__ = ("spec", "_terms")

    def __init__(self, spec: VarSpec, terms: Mapping | None = None, *, _packed: dict | None = None):
        self.spec = spec
        if _packed is not None:
            self._terms = _packed
            return
        packed = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != spec.nvars:
                    raise ValueError(f"exponent tuple {exps} does not match {spec.names}")
                if not spec.contains(exps):
                    continue
                c = as_scalar(c)
                if c:
                    k = _encode(spec, exps)
                    packed[k] = packed.get(k, 0) + c
        self._terms = {k: v for k, v in packed.items() if v}

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, spec: VarSpec) -> "Series":
        return cls(spec, _packed={})

    @classmethod
    def const(cls, spec: VarSpec, c) -> "Series":
        c = as_scalar(c)
        return cls(spec, _packed={0: c} if c else {})

    @classmethod
    def one(cls, spec: VarSpec) -> "Series":
        return cls.const(spec, 1)

    @classmethod
    def monomial(cls, spec: VarSpec, coeff=1, **exps) -> "Series":
        e = [0] * spec.nvars
        for name, p in exps.items():
            e[spec.index(name)] = p
        return cls(spec, {tuple(e): coeff})

    @classmethod
    def var(cls, spec: VarSpec, name: str) -> "Series":
        return cls.monomial(spec, 1, **{name: 1})

    # -- inspection ------------------------------------------------------------
    def coefficients(self) -> dict:
        dec = _layout(self.spec).decode
        return {dec[k]: v for k, v in self._terms.items()}

    def coeff(self, *exps):
        if len(exps) == 1 and isinstance(exps[0], tuple):
            exps = exps[0]
        if len(exps) < self.spec.nvars:
            exps = tuple(exps) + (0,) * (self.spec.nvars - len(exps))
        if not self.spec.contains(exps):
            raise ValueError(f"monomial {exps} outside truncation bounds")
        return self._terms.get(_encode(self.spec, exps), mpq(0))

    def q_coeffs(self) -> list:
        """Dense list of q-coefficients; only for univariate series."""
        if self.spec.nvars != 1:
            raise ValueError("q_coeffs needs a series in q alone")
        out = [mpq(0)] * (self.spec.nq + 1)
        for k, v in self._terms.items():
            out[k] = v
        return out

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self):
        return self._terms.get(0, mpq(0))

    def min_degree(self) -> int | None:
        if not self._terms:
            return None
        tot = _layout(self.spec).total
        return min(tot[k] for k in self._terms)

    def sorted_items(self):
        """(exponent tuple, coefficient) pairs in graded order."""
        items = self.coefficients().items()
        return sorted(items, key=lambda kv: (sum(kv[0]), kv[0]))

    # -- ring operations -----------------------------------------------------------
    def _check(self, other: "Series"):
        if other.spec != self.spec:
            raise ValueError(f"VarSpec mismatch: {self.spec} vs {other.spec}")

    def _lift_operand(self, other):
        if isinstance(other, Series):
            self._check(other)
            return other
        return Series.const(self.spec, other)

    def __add__(self, other):
        if not isinstance(other, Series):
            try:
                other = Series.const(self.spec, other)
            except TypeError:
                return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Series(self.spec, _packed=out)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.spec, _packed={k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Series):
            try:
                other = Series.const(self.spec, other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Series":
        c = as_scalar(c)
        if not c:
            return Series.zero(self.spec)
        out = {}
        for k, v in self._terms.items():
            p = v * c
            if p:
                out[k] = p
        return Series(self.spec, _packed=out)

    def __mul__(self, other):
        if not isinstance(other, Series):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        return Series(self.spec, _packed=_mul_packed(self._terms, other._terms, self.spec))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, Series):
            self._check(other)
            return Series(self.spec, _packed=_div_packed(self._terms, other._terms, self.spec))
        c = as_scalar(other)
        if not c:
            raise ZeroDivisionError("division of a series by zero")
        inv = c.inverse() if isinstance(c, Cyclo) else 1 / c
        return self.scale(inv)

    def __rtruediv__(self, other):
        return Series.const(self.spec, other) / self

    def inverse(self) -> "Series":
        return Series.one(self.spec) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Series.one(self.spec)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, Series):
            return self.spec == other.spec and self._terms == other._terms
        try:
            return self == Series.const(self.spec, other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.spec, frozenset(self._terms.items())))

    # -- variable manipulation -------------------------------------------------
    def lift(self, spec: VarSpec) -> "Series":
        """Re-express over another VarSpec; variables absent from ``spec`` must not occur."""
        if spec == self.spec:
            return self
        pos = []
        for name in self.spec.names:
            pos.append(spec.names.index(name) if name in spec.names else None)
        out = {}
        for exps, c in self.coefficients().items():
            new = [0] * spec.nvars
            for i, e in enumerate(exps):
                if e:
                    if pos[i] is None:
                        raise ValueError(f"variable {self.spec.names[i]!r} missing from {spec.names}")
                    new[pos[i]] = e
            if spec.contains(new):
                out[tuple(new)] = c
        return Series(spec, out)

    def slice(self, name: str, degree: int) -> "Series":
        """Coefficient of ``name**degree`` as a series in the remaining variables."""
        i = self.spec.index(name)
        if i == 0:
            raise ValueError("cannot slice out q")
        names = tuple(n for n in self.spec.names if n != name)
        spec = VarSpec(names, self.spec.nq, self.spec.nt - degree)
        out = {}
        for exps, c in self.coefficients().items():
            if exps[i] == degree:
                out[exps[:i] + exps[i + 1:]] = c
        return Series(spec, out)

    def shift(self, coeff=1, **exps) -> "Series":
        """Multiply by the monomial ``coeff * prod(v**e)``."""
        e = [0] * self.spec.nvars
        for name, p in exps.items():
            e[self.spec.index(name)] = p
        if not self.spec.contains(e):
            return Series.zero(self.spec)
        lay = _layout(self.spec)
        k0 = _encode(self.spec, e)
        coeff = as_scalar(coeff)
        out = {}
        valid = lay.valid
        for k, v in self._terms.items():
            kk = k + k0
            if kk in valid:
                out[kk] = v * coeff if coeff != 1 else v
        return Series(self.spec, _packed=out)

    def truncate_var(self, name: str, max_degree: int) -> "Series":
        i = self.spec.index(name)
        dec = _layout(self.spec).decode
        return Series(self.spec, _packed={k: v for k, v in self._terms.items() if dec[k][i] <= max_degree})

    def substitute(self, name: str, value) -> "Series":
        """Bind a formal auxiliary variable to a scalar over the retained monomials."""
        i = self.spec.index(name)
        if i == 0:
            raise ValueError("substitute q numerically with series_eval_numeric")
        value = as_scalar(value)
        names = tuple(n for n in self.spec.names if n != name)
        spec = VarSpec(names, self.spec.nq, self.spec.nt)
        out = {}
        for exps, c in self.coefficients().items():
            key = exps[:i] + exps[i + 1:]
            out[key] = out.get(key, 0) + c * value ** exps[i]
        return Series(spec, out)

    def filter(self, predicate) -> "Series":
        dec = _layout(self.spec).decode
        return Series(self.spec, _packed={k: v for k, v in self._terms.items() if predicate(dec[k])})

    def map_coefficients(self, fn) -> "Series":
        out = {}
        for k, v in self._terms.items():
            w = fn(v)
            if w:
                out[k] = w
        return Series(self.spec, _packed=out)

    # -- display -------------------------------------------------------------------
    def __repr__(self):
        return f"Series({self.spec.names}, nq={self.spec.nq}, nt={self.spec.nt}: {format_series(self)})"


def format_series(s: Series) -> str:
    if s.is_zero():
        return "0"
    pieces = []
    for exps, c in s.sorted_items():
        mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(s.spec.names, exps) if e)
        if isinstance(c, Cyclo):
            cs = repr(c)
            pieces.append("+ " + (cs if not mono else f"{cs}*{mono}"))
            continue
        neg = c < 0
        mag = -c if neg else c
        if mono and mag == 1:
            body = mono
        else:
            mag_s = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            body = f"{mag_s}*{mono}" if mono else mag_s
        pieces.append(("- " if neg else "+ ") + body)
    text = " ".join(pieces)
    return text[2:] if text.startswith("+ ") else "-" + text[1:]


def _by_degree(terms: dict, total: dict) -> list:
    buckets: dict[int, list] = {}
    for k, v in terms.items():
        buckets.setdefault(total[k], []).append((k, v))
    return sorted(buckets.items())


def _mul_packed(a: dict, b: dict, spec: VarSpec) -> dict:
    if not a or not b:
        return {}
    if len(a) < len(b):
        a, b = b, a
    lay = _layout(spec)
    valid, total, nt = lay.valid, lay.total, spec.nt
    groups = _by_degree(b, total)
    out: dict = {}
    get = out.get
    for ka, ca in a.items():
        room = nt - total[ka]
        for deg, items in groups:
            if deg > room:
                break
            for kb, cb in items:
                k = ka + kb
                if k in valid:
                    out[k] = get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def _div_packed(a: dict, b: dict, spec: VarSpec) -> dict:
    b0 = b.get(0)
    if not b0:
        raise ZeroDivisionError("series is not invertible: zero constant term")
    inv0 = b0.inverse() if isinstance(b0, Cyclo) else 1 / b0
    rest = [(k, v) for k, v in b.items() if k]
    if not rest:
        return {k: v * inv0 for k, v in a.items()}
    lay = _layout(spec)
    valid = lay.valid
    acc = dict(a)
    out = {}
    for k in lay.order:
        s = acc.pop(k, None)
        if not s:
            continue
        t = s * inv0
        out[k] = t
        for kb, cb in rest:
            kk = k + kb
            if kk in valid:
                acc[kk] = acc.get(kk, 0) - cb * t
    return out


# -- parameter monomials and builders --------------------------------------------

@dataclass(frozen=True)
class ParamMonomial:
    """A Pochhammer argument ``coeff * q**qshift * prod(aux**p)``."""

    coeff: object = 1
    qshift: int = 0
    aux: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.qshift < 0:
            raise ValueError("negative q-shifts must be folded by the caller")
        object.__setattr__(self, "coeff", as_scalar(self.coeff))
        object.__setattr__(self, "aux", tuple(sorted(dict(self.aux).items())))

    @classmethod
    def formal(cls, name: str, coeff=1, qshift: int = 0) -> "ParamMonomial":
        return cls(coeff, qshift, ((name, 1),))

    def shifted(self, j: int) -> "ParamMonomial":
        return ParamMonomial(self.coeff, self.qshift + j, self.aux)

    def times(self, other: "ParamMonomial") -> "ParamMonomial":
        aux = dict(self.aux)
        for n, p in other.aux:
            aux[n] = aux.get(n, 0) + p
        return ParamMonomial(self.coeff * other.coeff, self.qshift + other.qshift, tuple(aux.items()))

    def scaled(self, c) -> "ParamMonomial":
        return ParamMonomial(self.coeff * as_scalar(c), self.qshift, self.aux)

    @property
    def degree(self) -> int:
        return self.qshift + sum(p for _, p in self.aux)

    def exponents(self, spec: VarSpec) -> tuple:
        e = [0] * spec.nvars
        e[0] = self.qshift
        for n, p in self.aux:
            e[spec.index(n)] += p
        return tuple(e)

    def as_series(self, spec: VarSpec) -> Series:
        return Series(spec, {self.exponents(spec): self.coeff})


def one_minus(x: ParamMonomial, spec: VarSpec) -> Series:
    return Series.one(spec) - x.as_series(spec)


def pochhammer(x: ParamMonomial, n, spec: VarSpec) -> Series:
    """(x; q)_n, with ``n`` a count or ``INFINITY``."""
    if n == INFINITY or n is None:
        if x.coeff == 0:
            return Series.one(spec)
        out = Series.one(spec)
        i = 0
        while True:
            e = x.shifted(i).exponents(spec)
            if not spec.contains(e):
                break
            out = out * one_minus(x.shifted(i), spec)
            i += 1
        return out
    if n < 0:
        raise ValueError("negative Pochhammer length")
    out = Series.one(spec)
    for i in range(int(n)):
        if not spec.contains(x.shifted(i).exponents(spec)):
            break
        out = out * one_minus(x.shifted(i), spec)
    return out


def qpoch_qq(n, spec: VarSpec) -> Series:
    """(q; q)_n."""
    return pochhammer(ParamMonomial(1, 1), n, spec)


def binom_expand(x: Series, alpha) -> Series:
    """(1 - x)**(-alpha) for x without constant term and rational alpha."""
    from .combinatorics import gen_binom

    if x.constant_term():
        raise ValueError("binom_expand needs a series with zero constant term")
    alpha = as_scalar(alpha)
    spec = x.spec
    out = Series.one(spec)
    if x.is_zero():
        return out
    power = Series.one(spec)
    j = 0
    while True:
        j += 1
        power = power * x
        if power.is_zero():
            break
        c = gen_binom(alpha + j - 1, j)
        if c:
            out = out + power.scale(c)
    return out


def qbinom_gauss(N: int, n: int, spec: VarSpec | None = None) -> Series:
    """Gaussian binomial [N choose n] via the q-Pascal rule."""
    if n < 0 or N < 0 or n > N:
        raise ValueError(f"need 0 <= n <= N, got N={N}, n={n}")
    # rows of integer coefficient lists
    row = [[1]]
    for m in range(1, N + 1):
        new = []
        for j in range(m + 1):
            left = row[j - 1] if j >= 1 else []
            right = row[j] if j < m else []
            # [m j] = [m-1 j-1] + q^j [m-1 j]
            length = max(len(left), len(right) + j)
            c = [0] * length
            for i, v in enumerate(left):
                c[i] += v
            for i, v in enumerate(right):
                c[i + j] += v
            new.append(c)
        row = new
    coeffs = row[n]
    if spec is None:
        d = n * (N - n)
        spec = VarSpec(("q",), d, d)
    terms = {(i,) + (0,) * (spec.nvars - 1): c for i, c in enumerate(coeffs) if c}
    return Series(spec, terms)


def basic_hypergeom(kind: str, upper, lower, z: ParamMonomial, terms: int, spec: VarSpec) -> Series:
    """Partial sum of r+1 phi r up to index ``terms`` (2phi1 or 3phi2)."""
    shapes = {"2phi1": (2, 1), "3phi2": (3, 2)}
    if kind not in shapes:
        raise ValueError(f"unknown hypergeometric kind {kind!r}")
    nu, nl = shapes[kind]
    if len(upper) != nu or len(lower) != nl:
        raise ValueError(f"{kind} needs {nu} upper and {nl} lower parameters")
    total = Series.one(spec)
    term = Series.one(spec)
    zs = z.as_series(spec)
    for n in range(terms):
        num = Series.one(spec)
        for u in upper:
            num = num * one_minus(u.shifted(n), spec)
        den = one_minus(ParamMonomial(1, n + 1), spec)
        for l in lower:
            den = den * one_minus(l.shifted(n), spec)
        if den.constant_term() == 0:
            raise ZeroDivisionError(f"lower parameter factor vanishes at n={n}")
        term = term * num * zs / den
        if term.is_zero():
            break
        total = total + term
    return total


@dataclass(frozen=True)
class Mismatch:
    exponents: tuple
    left: object
    right: object


def series_compare(s: Series, t: Series) -> Mismatch | None:
    """None if equal, else the first differing monomial in graded order."""
    s._check(t)
    if s._terms == t._terms:
        return None
    dec = _layout(s.spec).decode
    keys = set(s._terms) | set(t._terms)
    bad = [k for k in keys if s._terms.get(k, 0) != t._terms.get(k, 0)]
    first = min(bad, key=lambda k: (sum(dec[k]), dec[k]))
    return Mismatch(dec[first], s._terms.get(first, mpq(0)), t._terms.get(first, mpq(0)))


def series_eval_numeric(s: Series, binding: Mapping[str, float] | None = None):
    """Evaluate numerically; returns (value, tail bound estimate)."""
    binding = dict(binding or {})
    for name in s.spec.names:
        if name not in binding:
            raise KeyError(f"unbound variable {name!r}")
    qv = binding["q"]
    if abs(qv) >= 1:
        raise ValueError("|q| must be below 1")
    by_q: dict[int, complex] = {}
    vals = [binding[n] for n in s.spec.names]
    for exps, c in s.coefficients().items():
        w = to_complex(c)
        for v, e in zip(vals[1:], exps[1:]):
            w *= v ** e
        by_q[exps[0]] = by_q.get(exps[0], 0) + w
    # Horner in q
    acc = 0j
    for d in range(s.spec.nq, -1, -1):
        acc = acc * qv + by_q.get(d, 0)
    top = max((abs(by_q.get(d, 0)) for d in range(max(0, s.spec.nq - 2), s.spec.nq + 1)), default=0.0)
    tail = abs(qv) ** (s.spec.nq + 1) / (1 - abs(qv)) * top
    value = acc.real if all(not isinstance(x, complex) for x in vals) and abs(acc.imag) < 1e-300 else acc
    return value, tail


def series_to_json(s: Series) -> dict:
    return {
        "variables": list(s.spec.names),
        "nq": s.spec.nq,
        "nt": s.spec.nt,
        "terms": [{"exponents": list(e), "value": scalar_to_json(c)} for e, c in s.sorted_items()],
    }


def series_from_json(obj: dict) -> Series:
    spec = VarSpec(tuple(obj["variables"]), obj["nq"], obj["nt"])
    terms = {}
    for t in obj["terms"]:
        v = t["value"]
        if isinstance(v, dict):
            c = Cyclo(v["N"], [mpq(int(n), int(d)) for n, d in v["coefficients"]])
        else:
            c = mpq(int(v[0]), int(v[1]))
        terms[tuple(t["exponents"])] = c
    return Series(spec, terms)


def univariate(nq: int) -> VarSpec:
    return VarSpec(("q",), nq, nq)


def series_exp(x: Series, cap=None) -> Series:
    """exp(x) for x without constant term; ``cap`` post-processes each power (e.g. truncation)."""
    if x.constant_term():
        raise ValueError("series_exp needs a series with zero constant term")
    out = Series.one(x.spec)
    power = Series.one(x.spec)
    k = 0
    while True:
        k += 1
        power = power * x
        if cap is not None:
            power = cap(power)
        if power.is_zero():
            return out
        out = out + power.scale(mpq(1, math.factorial(k)))


def series_sum(parts: Iterable[Series], spec: VarSpec) -> Series:
    total = Series.zero(spec)
    for p in parts:
        total = total + p
    return total
