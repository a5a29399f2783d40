"""The identity catalogue.

Each entry registers its sides as builders taking a :class:`ParamBinding`.
The first side listed is the reference every other side is compared with.
"""
from __future__ import annotations

from math import comb, factorial

from gmpy2 import mpq

from ..combinatorics import coeff_A, coeff_C, eulerian_poly, gen_binom, n_poly, q_coef
from ..scalars import as_scalar, rational_power
from ..series import (ParamMonomial, Series, VarSpec, basic_hypergeom, binom_expand,
                      one_minus, pochhammer, qbinom_gauss, series_exp)
from . import builders as B
from .registry import FORMAL, REGISTRY, IdentityDescriptor, ParamSpec

INF = None  # pochhammer() treats None as an infinite product


# -- parameter checks ------------------------------------------------------------

def _positive(v, b):
    if v < 1:
        return "must be at least 1"


def _nonneg(v, b):
    if v < 0:
        return "must be nonnegative"


def _nonzero(v, b):
    if v is not FORMAL and v == 0:
        return "must be nonzero"


def _not_one(v, b):
    if v == 1:
        return "must differ from 1"


def _small(limit):
    def check(v, b):
        if not 1 <= v <= limit:
            return f"must lie in 1..{limit}"
    return check


def _c_for_alpha(v, b):
    if v == 0:
        return "must be nonzero"
    try:
        rational_power(1 - v, -b["alpha"])
    except (ValueError, ZeroDivisionError) as exc:
        return f"(1 - c)^(-alpha) is not rational: {exc}"


def _nonempty(v, b):
    if not v:
        return "needs at least one entry"


def _register(id, sides, schema, anchor, suite, expected_fail=False, notes=""):
    REGISTRY.add(IdentityDescriptor(id=id, sides=tuple(sides), schema=schema, anchor=anchor,
                                    expected_fail=expected_fail, suite=tuple(suite), notes=notes))


C_SUITE = ({"c": mpq(1, 2)}, {"c": mpq(-1, 3)}, {"c": mpq(2, 5)})
NO_PARAMS = ({}, {}, {})


# -- one-variable divisor, Ramanujan and Uchimura sums --------------------------------

_register(
    "ramanujan-entry4",
    [("ramanujan", lambda b: B.kluyver_ramanujan(b.spec, b["c"])),
     ("divisor", lambda b: B.sigma_series(b.spec, 0, b["c"]))],
    {"c": ParamSpec("scalar", mpq(1, 2), "weight of each divisor", _nonzero)},
    "weighted Ramanujan sum against the weighted divisor series sum sigma_{0,c}(n) q^n",
    C_SUITE,
)

_register(
    "kluyver",
    [("ramanujan", lambda b: B.kluyver_ramanujan(b.spec, 1)),
     ("divisor", lambda b: B.sigma_series(b.spec, 0, 1))],
    {},
    "sum (-1)^(n-1) q^{n(n+1)/2} / ((1-q^n)(q)_n) equals sum d(n) q^n",
    NO_PARAMS,
)

_register(
    "uchimura-3way",
    [("uchimura", lambda b: B.uchimura_moment(b.spec, 1)),
     ("ramanujan", lambda b: B.v_sum(b.spec, 1, 1)),
     ("divisor", lambda b: B.sigma_series(b.spec, 0, 1))],
    {},
    "sum n q^n (q^{n+1})_inf, the alternating Ramanujan sum and sum d(n) q^n",
    NO_PARAMS,
)

_register(
    "uchimura-bell",
    [("uchimura", lambda b: B.uchimura_moment(b.spec, b["m"])),
     ("bell", lambda b: B.bell_side(b.spec, b["m"]))],
    {"m": ParamSpec("int", 2, "moment order", _small(5))},
    "moment sum sum n^m q^n (q^{n+1})_inf against Y_m of the divisor series K_j",
    tuple({"m": m} for m in range(1, 6)),
)

_register(
    "abem-bell",
    [("uchimura", lambda b: B.uchimura_moment(b.spec, b["m"], b["c"])),
     ("bell", lambda b: B.c_quotient(b.spec, b["c"], B.bell_side(b.spec, b["m"], b["c"])))],
    {"c": ParamSpec("scalar", mpq(1, 2), "weight", _nonzero),
     "m": ParamSpec("int", 2, "moment order", _small(6))},
    "weighted moment M_{m,c} against (q)_inf/(cq)_inf times Y_m(K_{1,c}, ..., K_{m,c})",
    ({"c": mpq(1, 2), "m": 1}, {"c": mpq(-1, 3), "m": 2}, {"c": mpq(2, 5), "m": 3},
     {"c": mpq(1, 2), "m": 4}, {"c": mpq(-1, 3), "m": 5}, {"c": 1, "m": 3}),
)


def _exp_cumulant_lhs(b):
    spec, T, c = b.spec, b["t_order"], b["c"]
    expo = Series.zero(spec)
    for m in range(1, T + 1):
        k = B.sigma_series(spec, m - 1, c)
        expo = expo + k.shift(mpq(1, factorial(m)), t=m)
    e = series_exp(expo, cap=lambda s: s.truncate_var("t", T))
    return B.c_quotient(spec, c, e).truncate_var("t", T)


def _exp_cumulant_rhs(b):
    spec, T, c = b.spec, b["t_order"], b["c"]
    total = B.c_quotient(spec, c)
    for m in range(1, T + 1):
        total = total + B.uchimura_moment(spec, m, c).shift(mpq(1, factorial(m)), t=m)
    return total.truncate_var("t", T)


_register(
    "exp-cumulant",
    [("exponential", _exp_cumulant_lhs), ("moments", _exp_cumulant_rhs)],
    {"t": ParamSpec("formal", FORMAL, "generating variable"),
     "c": ParamSpec("scalar", 1, "weight", _nonzero),
     "t_order": ParamSpec("int", 5, "highest power of t retained", _small(8))},
    "exp(sum K_{m,c} t^m/m!) (q)_inf/(cq)_inf against (q)_inf/(cq)_inf + sum M_{m,c} t^m/m!",
    ({"c": 1}, {"c": mpq(1, 2)}, {"c": mpq(-1, 3)}, {"c": mpq(2, 5)}),
    notes="both sides are truncated at t^t_order",
)


def _nested_divisor(spec: VarSpec, k: int) -> Series:
    """sum over n_1 >= ... >= n_k >= 1 of prod q^{n_i}/(1 - q^{n_i})."""
    g = [None] + [B.qpow(spec, j) / one_minus(ParamMonomial(1, j), spec) for j in range(1, spec.nq + 1)]
    cur = g[:]
    for _ in range(k - 1):
        cum = Series.zero(spec)
        nxt = [None]
        for j in range(1, spec.nq + 1):
            cum = cum + cur[j]
            nxt.append(g[j] * cum)
        cur = nxt
    return sum(cur[1:], Series.zero(spec))


_register(
    "dilcher-1",
    [("uchimura", lambda b: B.uchimura_type(b.spec, lambda n: comb(n, b["k"]))),
     ("ramanujan", lambda b: B.v_sum(b.spec, b["k"], b["k"])),
     ("divisor", lambda b: _nested_divisor(b.spec, b["k"]))],
    {"k": ParamSpec("int", 2, "nesting depth", _small(6))},
    "binomial moment sum, the Ramanujan sum with q^{C(n,2)+nk}, and the nested divisor sum",
    tuple({"k": k} for k in range(1, 6)),
)


def _acs_lemma_lhs(b):
    spec, k = b.spec, b["k"]
    total = Series.zero(spec)
    inv = Series.one(spec)
    for n in range(1, spec.nq + 1):
        inv = inv / one_minus(ParamMonomial(1, n), spec)
        w = comb(k + n - 1, k)
        if w:
            total = total + inv.shift(w, q=n)
    return B.mul_poch(total, ParamMonomial(1, 1))


_register(
    "acs-lemma",
    [("uchimura", _acs_lemma_lhs),
     ("ramanujan", lambda b: B.v_sum(b.spec, b["k"], 1))],
    {"k": ParamSpec("int", 2, "power of the denominator", _small(8))},
    "(q)_inf sum C(k+n-1, k) q^n/(q)_n against sum (-1)^(n-1) q^{n(n+1)/2}/((1-q^n)^k (q)_n)",
    tuple({"k": k} for k in (1, 2, 3, 5)),
)

_register(
    "eulerian-3way",
    [("uchimura", lambda b: B.uchimura_moment(b.spec, b["m"], b["c"])),
     ("ramanujan", lambda b: B.eulerian_ramanujan(b.spec, b["m"], b["c"])),
     ("bell", lambda b: B.c_quotient(b.spec, b["c"], B.bell_side(b.spec, b["m"], b["c"])))],
    {"c": ParamSpec("scalar", mpq(1, 2), "weight", _nonzero),
     "m": ParamSpec("int", 2, "moment order", _small(6))},
    "weighted moments as an Eulerian-polynomial Ramanujan sum and as a Bell polynomial",
    ({"c": mpq(1, 2), "m": 1}, {"c": mpq(-1, 3), "m": 2}, {"c": mpq(2, 5), "m": 3},
     {"c": 1, "m": 4}, {"c": mpq(1, 2), "m": 5}),
)

_register(
    "entry4-uchimura-type",
    [("uchimura", lambda b: B.div_poch(B.mul_poch(B.uchimura_moment(b.spec, 1, b["c"]),
                                                 ParamMonomial(b["c"], 1)), ParamMonomial(1, 1))),
     ("ramanujan", lambda b: B.kluyver_ramanujan(b.spec, b["c"])),
     ("divisor", lambda b: B.sigma_series(b.spec, 0, b["c"]))],
    {"c": ParamSpec("scalar", mpq(1, 2), "weight", _nonzero)},
    "(cq)_inf/(q)_inf sum n c^n q^n (q^{n+1})_inf against the weighted Ramanujan and divisor sums",
    C_SUITE,
)


def _mm_ramanujan(b):
    spec, m = b.spec, b["m"]
    A = eulerian_poly(m)

    def extra(n):
        x = B.qpow(spec, n)
        return A.evaluate((x,)) * binom_expand(x, m)

    return B.alternating_sum(spec, lambda n: n * (n - 1) // 2 + n, extra)


_register(
    "uchimura-mm-3way",
    [("uchimura", lambda b: B.uchimura_moment(b.spec, b["m"])),
     ("ramanujan", _mm_ramanujan),
     ("bell", lambda b: B.bell_side(b.spec, b["m"]))],
    {"m": ParamSpec("int", 2, "moment order", _small(6))},
    "M_m, sum (-1)^(n-1) q^{n(n+1)/2} A_m(q^n)/((1-q^n)^m (q)_n) and Y_m(K_1, ..., K_m)",
    tuple({"m": m} for m in range(1, 6)),
)


def _u_tail_side(b):
    spec, m, i0 = b.spec, b["m"], b["i0"]
    total = B.uchimura_moment(spec, m, 1, start=i0)
    for i in range(1, i0):
        tail = pochhammer(ParamMonomial(1, i + 1), INF, spec)
        total = total + tail.shift(mpq(i) ** m, q=i)
    return total


_register(
    "u-tails",
    [("tail", _u_tail_side),
     ("quotient", lambda b: B.moment_via_quotient(b.spec, b["m"])),
     ("uchimura", lambda b: B.uchimura_moment(b.spec, b["m"]))],
    {"m": ParamSpec("int", 1, "moment order", _nonneg),
     "i0": ParamSpec("int", 3, "first index of the tail", _positive)},
    "U_{m,i0} plus its head terms against (q)_inf sum n^m q^n/(q)_n and M_m",
    ({"m": 0, "i0": 1}, {"m": 1, "i0": 3}, {"m": 2, "i0": 2}, {"m": 3, "i0": 5}),
)


def _finite_uchimura_lhs(b):
    spec, N = b.spec, b["N"]
    total = Series.zero(spec)
    for n in range(1, spec.nq + 1):
        p = pochhammer(ParamMonomial(1, n + 1), N - 1, spec)
        total = total + p.shift(n, q=n) - p.shift(n, q=n + N)
    return total


def _finite_uchimura_mid(b):
    spec, N = b.spec, b["N"]
    total = Series.zero(spec)
    for n in range(1, N + 1):
        t = qbinom_gauss(N, n, spec) / one_minus(ParamMonomial(1, n), spec)
        total = total + t.shift(1 if n % 2 else -1, q=n * (n + 1) // 2)
    return total


_register(
    "finite-uchimura",
    [("uchimura", _finite_uchimura_lhs),
     ("ramanujan", _finite_uchimura_mid),
     ("divisor", lambda b: sum((B.qpow(b.spec, n) / one_minus(ParamMonomial(1, n), b.spec)
                                for n in range(1, b["N"] + 1)), Series.zero(b.spec)))],
    {"N": ParamSpec("int", 3, "length of the finite product", _positive)},
    "finite analogue: sum n q^n (q^{n+1})_{N-1}(1 - q^N), the Gaussian-binomial sum and sum_{n<=N} q^n/(1-q^n)",
    ({"N": 1}, {"N": 2}, {"N": 7}, {"N": 4}),
)


# -- two-variable and alpha families ---------------------------------------------------

def _dixit_maji_lhs(b):
    spec, c = b.spec, b["c"]
    a, bb = b.mono("a"), b.mono("b")
    total = Series.zero(spec)
    ratio = Series.one(spec)                    # (b/a)_n a^n / (b)_n
    for n in range(1, spec.nt + 1):
        ratio = ratio * (a.as_series(spec) - bb.shifted(n - 1).as_series(spec))
        ratio = ratio / one_minus(bb.shifted(n - 1), spec)
        if ratio.is_zero():
            break
        total = total + ratio / one_minus(ParamMonomial(c, n), spec)
    return total


def _dixit_maji_rhs(b):
    spec, c = b.spec, b["c"]
    a, bb = b.mono("a"), b.mono("b")
    total = Series.zero(spec)
    ratio = Series.one(spec)                    # (b/c)_m c^m / (b)_m
    for m in range(0, spec.nt + 1):
        if m >= 1:
            ratio = ratio * (Series.const(spec, c) - bb.shifted(m - 1).as_series(spec))
            ratio = ratio / one_minus(bb.shifted(m - 1), spec)
        geo = binom_expand(a.shifted(m).as_series(spec), 1) - binom_expand(bb.shifted(m).as_series(spec), 1)
        if geo.is_zero():
            break
        total = total + ratio * geo
    return total


_register(
    "dixit-maji",
    [("left", _dixit_maji_lhs), ("right", _dixit_maji_rhs)],
    {"a": ParamSpec("formal", FORMAL), "b": ParamSpec("formal", FORMAL),
     "c": ParamSpec("scalar", mpq(1, 2), "|c| < 1 keeps the right side convergent", _nonzero)},
    "sum_{n>=1} (b/a)_n a^n/((1-cq^n)(b)_n) = sum_{m>=0} (b/c)_m c^m/(b)_m (aq^m/(1-aq^m) - bq^m/(1-bq^m))",
    C_SUITE,
)


def _gk_alpha_lhs(b):
    return B.gk_ramanujan(b.spec, b.mono("a"), b["alpha"])


def _gk_alpha_rhs(b):
    alpha = b["alpha"]
    return -B.gk_uchimura(b.spec, b.mono("a"), lambda n: gen_binom(alpha + n - 1, n - 1))


_register(
    "gupta-kumar-alpha",
    [("ramanujan", _gk_alpha_lhs), ("uchimura", _gk_alpha_rhs)],
    {"a": ParamSpec("formal", FORMAL),
     "alpha": ParamSpec("rational", 2, "exponent of (1 - q^n)")},
    "sum (q/a)_n a^n/((1-q^n)^alpha (q)_n) against -(q)_inf/(a)_inf sum C(alpha+n-1, n-1)(a/q)_n q^n/(q)_n",
    ({"alpha": 1}, {"alpha": mpq(5, 2)}, {"alpha": mpq(-1, 3)}, {"alpha": 2}, {"alpha": mpq(-2, 5)}),
)


def _two_var_lhs(b, weight_series, n_start=1):
    """sum_{n>=n_start} (b/a)_n a^n / (d)_n * weight_series(n)."""
    spec = b.spec
    a, bb, d = b.mono("a"), b.mono("b"), b["d"]
    total = Series.zero(spec)
    ratio = Series.one(spec)
    for n in range(0, spec.nt + 1):
        if n >= 1:
            ratio = ratio * (a.as_series(spec) - bb.shifted(n - 1).as_series(spec))
            ratio = ratio / one_minus(ParamMonomial(d, n - 1), spec)
            if ratio.is_zero():
                break
        if n >= n_start:
            total = total + ratio * weight_series(n)
    return total


def _two_var_inner(b, j: int) -> Series:
    """sum_{n>=0} (ad/b)_n (-b)^n q^{C(n,2)+jn} / ((d)_n (aq^j)_{n+1})."""
    spec = b.spec
    a, bb, d = b.mono("a"), b.mono("b"), b["d"]
    total = Series.zero(spec)
    ratio = Series.one(spec) / one_minus(a.shifted(j), spec)
    for n in range(0, spec.nt + 1):
        if n >= 1:
            ratio = ratio * (a.scaled(d).shifted(n - 1).as_series(spec) - bb.as_series(spec))
            ratio = ratio / one_minus(ParamMonomial(d, n - 1), spec)
            ratio = ratio / one_minus(a.shifted(j + n), spec)
        term = ratio.shift(1, q=n * (n - 1) // 2 + j * n)
        if term.is_zero() and n >= 1:
            break
        total = total + term
    return total


def _general_f_lhs(b):
    spec, c, lam = b.spec, b["c"], b["lam"]

    def f(n):
        return sum((B.qpow(spec, j * n, l * c ** j) for j, l in enumerate(lam) if l),
                   Series.zero(spec))

    return _two_var_lhs(b, f, n_start=0)


def _general_f_rhs(b):
    spec, c, lam = b.spec, b["c"], b["lam"]
    total = Series.zero(spec)
    for j, l in enumerate(lam):
        if l:
            total = total + _two_var_inner(b, j).scale(l * c ** j)
    return total


_register(
    "general-f",
    [("left", _general_f_lhs), ("right", _general_f_rhs)],
    {"a": ParamSpec("formal", FORMAL), "b": ParamSpec("formal", FORMAL),
     "c": ParamSpec("scalar", mpq(1, 2), "argument scale", _nonzero),
     "d": ParamSpec("scalar", mpq(1, 3), "denominator parameter", _not_one),
     "lam": ParamSpec("rational-list", (1, 2), "coefficients of the polynomial f", _nonempty)},
    "sum (b/a)_n a^n f(cq^n)/(d)_n for a polynomial f, against the transformed double sum",
    ({"c": mpq(1, 2), "d": mpq(1, 3), "lam": (1, 2)},
     {"c": mpq(-1, 3), "d": mpq(-2, 1), "lam": (0, 1, -1)},
     {"c": 2, "d": 0, "lam": (3, 0, 0, 1)}, {"c": mpq(2, 5), "d": mpq(-1, 5), "lam": (1, mpq(-1, 2), 1)}),
)


def _rr_alpha_lhs(b):
    spec, c, alpha = b.spec, b["c"], b["alpha"]
    const = Series.const(spec, rational_power(1 - c, -alpha))
    return const + _two_var_lhs(b, lambda n: binom_expand(B.qpow(spec, n, c), alpha))


def _rr_alpha_rhs(b):
    spec, c, alpha = b.spec, b["c"], b["alpha"]
    total = Series.const(spec, rational_power(1 - c, -alpha))
    one = Series.one(spec)
    for j in range(0, spec.nt):
        w = c ** j * gen_binom(alpha + j - 1, j)
        if w:
            total = total + (_two_var_inner(b, j) - one).scale(w)
    return total


_register(
    "rr-alpha",
    [("left", _rr_alpha_lhs), ("right", _rr_alpha_rhs)],
    {"a": ParamSpec("formal", FORMAL), "b": ParamSpec("formal", FORMAL),
     "alpha": ParamSpec("rational", mpq(1, 2), "exponent of (1 - cq^n)"),
     "c": ParamSpec("scalar", mpq(3, 4), "|c| < 1; (1-c)^(-alpha) must be rational", _c_for_alpha),
     "d": ParamSpec("scalar", mpq(1, 3), "denominator parameter", _not_one)},
    "sum (b/a)_n a^n/((d)_n (1-cq^n)^alpha) against sum_j c^j C(alpha+j-1, j) times the inner transformed sum",
    ({"alpha": mpq(1, 2), "c": mpq(3, 4), "d": mpq(1, 3)},
     {"alpha": mpq(1, 2), "c": mpq(-9, 16), "d": mpq(-1, 2)},
     {"alpha": 2, "c": mpq(1, 3), "d": 0},
     {"alpha": mpq(-3, 2), "c": mpq(3, 4), "d": mpq(2, 3)}),
    notes="the n = 0 constant (1 - c)^(-alpha) is split off exactly on both sides",
)


def _cor_lhs(b):
    spec, c, alpha = b.spec, b["c"], b["alpha"]
    a, bb = b.mono("a"), b.mono("b")
    total = Series.const(spec, rational_power(1 - c, -alpha))
    ratio = Series.one(spec)                   # (b/a)_n a^n / (q)_n
    for n in range(1, spec.nt + 1):
        ratio = ratio * (a.as_series(spec) - bb.shifted(n - 1).as_series(spec))
        ratio = ratio / one_minus(ParamMonomial(1, n), spec)
        if ratio.is_zero():
            break
        total = total + ratio * binom_expand(B.qpow(spec, n, c), alpha)
    return total


def _cor_rhs(b):
    spec, c, alpha = b.spec, b["c"], b["alpha"]
    a, bb = b.mono("a"), b.mono("b")
    total = Series.const(spec, rational_power(1 - c, -alpha))
    one = Series.one(spec)
    y = one
    for n in range(spec.nq + 1, -1, -1):
        if n <= spec.nq:
            y = y * one_minus(bb.shifted(n), spec) / one_minus(a.shifted(n), spec)
        w = c ** n * gen_binom(alpha + n - 1, n)
        if w:
            total = total + (y - one).scale(w)
    return total


_register(
    "cor-2var-rr",
    [("left", _cor_lhs), ("right", _cor_rhs)],
    {"a": ParamSpec("formal", FORMAL), "b": ParamSpec("formal", FORMAL),
     "alpha": ParamSpec("rational", mpq(1, 2), "exponent of (1 - cq^n)"),
     "c": ParamSpec("scalar", mpq(3, 4), "|c| < 1; (1-c)^(-alpha) must be rational", _c_for_alpha)},
    "sum (b/a)_n a^n/((q)_n (1-cq^n)^alpha) against sum c^n C(alpha+n-1, n) (bq^n)_inf/(aq^n)_inf",
    ({"alpha": mpq(1, 2), "c": mpq(3, 4)}, {"alpha": 2, "c": mpq(-1, 3)},
     {"alpha": mpq(-3, 2), "c": mpq(3, 4)}, {"alpha": 3, "c": mpq(2, 5)}),
)


def _u2_uchimura(b):
    alpha, r = b["alpha"], b["r"]
    return B.uchimura_type(b.spec, lambda n: gen_binom(alpha + n - r, n - r), start=r)


_register(
    "uchimura-2var",
    [("ramanujan", lambda b: B.v_sum(b.spec, b["alpha"], b["r"])),
     ("uchimura", _u2_uchimura)],
    {"alpha": ParamSpec("rational", 1, "exponent of (1 - q^n)"),
     "r": ParamSpec("int", 1, "shift of the quadratic exponent", _positive)},
    "sum (-1)^(n-1) q^{C(n,2)+nr}/((1-q^n)^alpha (q)_n) against sum_{j>=r} C(alpha+j-r, j-r) q^j (q^{j+1})_inf",
    ({"alpha": 1, "r": 1}, {"alpha": 2, "r": 2}, {"alpha": mpq(5, 2), "r": 3}, {"alpha": mpq(-1, 3), "r": 2}, {"alpha": mpq(7, 5), "r": 2}),
)


# -- Dilcher-type sums ----------------------------------------------------------------

def _dilcher_tails(b):
    spec, k, r = b.spec, b["k"], b["r"]
    total = Series.zero(spec)
    for t in range(1, k + 1):
        for j in range(0, k - t + 1):
            w = comb(k - 1, j + t - 1) * coeff_A(j + t, r, t)
            if w:
                total = total + B.uchimura_moment(spec, t, 1, start=r + j + t - 1).scale(w)
    for j in range(1, k + 1):
        w = comb(k - 1, j - 1) * coeff_A(j, r, 0)
        if w:
            total = total + B.uchimura_moment(spec, 0, 1, start=r + j - 1).scale(w)
    return total


def _dilcher_product(b):
    spec, k, r = b.spec, b["k"], b["r"]

    def weight(n):
        return sum(comb(k - 1, j - 1) * comb(n - r + 1, j)
                   for j in range(1, k + 1) if n >= r + j - 1)

    return B.uchimura_type(spec, weight, start=r)


_register(
    "dilcher-corrected",
    [("ramanujan", lambda b: B.v_sum(b.spec, b["k"], b["r"])),
     ("tails", _dilcher_tails),
     ("product", _dilcher_product)],
    {"k": ParamSpec("int", 2, "power of (1 - q^n)", _small(6)),
     "r": ParamSpec("int", 1, "shift of the quadratic exponent", _positive)},
    "V_{k,r} as a combination of tails U_{t,i} with A-coefficients, and as a single binomial-weighted product sum",
    ({"k": 1, "r": 1}, {"k": 2, "r": 3}, {"k": 3, "r": 2}, {"k": 4, "r": 1}, {"k": 5, "r": 4}),
)


def _dilcher_original(b):
    spec, k = b.spec, b["k"]
    total = Series.zero(spec)
    for t in range(1, k + 1):
        w = coeff_C(k, 1, t)
        if w:
            total = total + B.uchimura_moment(spec, t).scale(w)
    return total


_register(
    "dilcher-original-discrepancy",
    [("ramanujan", lambda b: B.v_sum(b.spec, b["k"], 1)),
     ("original", _dilcher_original)],
    {"k": ParamSpec("int", 2, "power of (1 - q^n)", _small(6))},
    "V_{k,1} against the uncorrected single sum of moments sum_t a(k,t) U_{t,1}",
    tuple({"k": k} for k in range(1, 6)),
    expected_fail=True,
    notes="recorded discrepancy; never affects the exit status",
)


# -- the polynomial P_k chain ------------------------------------------------------------

def _two_spec(spec: VarSpec, name: str = "a") -> VarSpec:
    return VarSpec(spec.names + (name,), spec.nq, spec.nt)


def _acs_pk_slice(b):
    ext = _two_spec(b.spec)
    s = B.gk_polynomial(ext, b["k"], ParamMonomial.formal("a"))
    return s.slice("a", 0)


_register(
    "acs-pk",
    [("ramanujan", lambda b: B.v_sum(b.spec, b["k"], 1)),
     ("polynomial", lambda b: B.gk_polynomial(b.spec, b["k"], None)),
     ("a-slice", _acs_pk_slice)],
    {"k": ParamSpec("int", 2, "power of (1 - q^n)", _small(6))},
    "V_{k,1} = P_k(S_0, ..., S_{k-1}), also read off as the a^0 part of the two-variable form",
    tuple({"k": k} for k in range(1, 6)),
)

_register(
    "gk-pk",
    [("ramanujan", lambda b: -B.gk_ramanujan(b.spec, b.mono("a"), b["k"])),
     ("polynomial", lambda b: B.gk_polynomial(b.spec, b["k"], b.mono("a"))),
     ("uchimura", lambda b: B.gk_uchimura(b.spec, b.mono("a"), lambda n: comb(b["k"] + n - 1, b["k"])))],
    {"a": ParamSpec("formal", FORMAL),
     "k": ParamSpec("int", 2, "power of (1 - q^n)", _small(5))},
    "-sum (q/a)_n a^n/((1-q^n)^k (q)_n) = P_k(frak S_{0,a}, ..., frak S_{k-1,a}) and its Uchimura form",
    tuple({"k": k} for k in range(1, 5)),
)


def _gk2_rhs(spec: VarSpec, k: int, a: ParamMonomial, c) -> Series:
    p = B.gk_polynomial(spec, k, a, c)
    p = B.mul_poch(p, ParamMonomial(1, 1))
    p = B.mul_poch(p, a.scaled(c))
    p = B.div_poch(p, ParamMonomial(c, 1))
    p = B.div_poch(p, a)
    return p.scale(-1 / as_scalar(c))


_register(
    "gk-pk-2var",
    [("ramanujan", lambda b: B.gk_ramanujan(b.spec, b.mono("a"), b["k"] + 1, b["c"], den_shift=1)),
     ("polynomial", lambda b: _gk2_rhs(b.spec, b["k"], b.mono("a"), b["c"]))],
    {"a": ParamSpec("formal", FORMAL),
     "k": ParamSpec("int", 1, "polynomial index", _small(4)),
     "c": ParamSpec("scalar", mpq(1, 3), "weight", _nonzero)},
    "sum (q/a)_n a^n/((1-cq^n)^{k+1}(q)_{n-1}) = -(1/c)(q)_inf(ac)_inf/((cq)_inf(a)_inf) P_k(frak S_{m,a,c})",
    ({"k": 1, "c": mpq(1, 3)}, {"k": 2, "c": mpq(-1, 4)}, {"k": 3, "c": mpq(1, 3)}, {"k": 4, "c": mpq(-1, 4)}, {"k": 2, "c": mpq(2, 5)}),
)


def _gk2c_slice(b):
    ext = _two_spec(b.spec)
    s = _gk2_rhs(ext, b["k"], ParamMonomial.formal("a"), b["c"])
    return (-s).slice("a", 0)


def _gk2c_direct(b):
    spec, k, c = b.spec, b["k"], b["c"]
    p = B.gk_polynomial(spec, k, None, c)
    return B.c_quotient(spec, c, p).scale(1 / as_scalar(c))


def _gk2c_sum(b):
    spec, k, c = b.spec, b["k"], b["c"]
    # a = 0: (q/a)_n a^n = (-1)^n q^{n(n+1)/2}
    total = Series.zero(spec)
    inv = Series.one(spec)
    n = 1
    while n * (n + 1) // 2 <= spec.nq:
        if n >= 2:
            inv = inv / one_minus(ParamMonomial(1, n - 1), spec)
        body = inv.shift(-1 if n % 2 else 1, q=n * (n + 1) // 2)
        total = total + body * binom_expand(B.qpow(spec, n, c), k + 1)
        n += 1
    return -total


_register(
    "gk-pk-2var-c",
    [("a-slice", _gk2c_slice), ("polynomial", _gk2c_direct), ("ramanujan", _gk2c_sum)],
    {"k": ParamSpec("int", 1, "polynomial index", _small(4)),
     "c": ParamSpec("scalar", mpq(1, 3), "weight", _nonzero)},
    "the a = 0 specialisation: (1/c)(q)_inf/(cq)_inf P_k(S_{0,c}, ..., S_{k-1,c}) against the Ramanujan-type sum",
    ({"k": 1, "c": mpq(1, 3)}, {"k": 2, "c": mpq(-1, 4)}, {"k": 3, "c": mpq(1, 2)}, {"k": 2, "c": mpq(-3, 5)}),
)


def _amono(b):
    return b.mono("a")


def _with_y(spec: VarSpec, extra: int) -> VarSpec:
    return VarSpec(spec.names + ("y",), spec.nq, spec.nt + extra)


def _lemma5_derivative(b):
    r = b["r"]
    ext = _with_y(b.spec, r)
    x = Series.one(ext) + Series.var(ext, "y")
    g = B.x_quotient(ext, _amono(b), b["c"], x)
    return B.taylor_coefficient(g, "y", r)


def _lemma5_series(b):
    spec, r, c = b.spec, b["r"], b["c"]
    s = B.gk_uchimura_sum(spec, _amono(b), lambda n: comb(n, r), c)
    return s.scale(factorial(r))


_register(
    "lemma5",
    [("derivative", _lemma5_derivative), ("series", _lemma5_series)],
    {"a": ParamSpec("formal|scalar", FORMAL),
     "r": ParamSpec("int", 1, "order of the x-derivative", _small(6)),
     "c": ParamSpec("scalar", mpq(1, 2), "weight", _nonzero)},
    "r-th x-derivative at x = 1 of (xac)_inf/(xcq)_inf against r! sum C(n,r) c^n (a/q)_n q^n/(q)_n",
    ({"r": 1, "c": mpq(1, 2)}, {"r": 2, "c": mpq(-1, 3)}, {"r": 3, "c": mpq(1, 2), "a": mpq(1, 5)},
     {"r": 4, "c": mpq(2, 3)}),
)


def _lemma6_derivative(b):
    i = b["i"]
    ext = _with_y(b.spec, i)
    x = Series.const(ext, b["x0"]) + Series.var(ext, "y")
    g = B.x_quotient(ext, _amono(b), b["c"], x)
    return B.taylor_coefficient(g, "y", i)


def _lemma6_product(b):
    spec, i, c = b.spec, b["i"], b["c"]
    x = Series.const(spec, b["x0"])
    g = B.x_quotient(spec, _amono(b), c, x)
    ts = tuple(B.t_function(spec, r, _amono(b), c, x) for r in range(1, i + 1))
    return g * n_poly(i).evaluate(ts)


_register(
    "lemma6",
    [("derivative", _lemma6_derivative), ("product", _lemma6_product)],
    {"a": ParamSpec("formal|scalar", FORMAL),
     "i": ParamSpec("int", 1, "order of the x-derivative", _small(5)),
     "c": ParamSpec("scalar", mpq(1, 2), "weight", _nonzero),
     "x0": ParamSpec("scalar", 1, "point of differentiation", _nonzero)},
    "i-th x-derivative of (xac)_inf/(xcq)_inf equals the quotient times N_i(T_1, ..., T_i)",
    ({"i": 1, "c": mpq(1, 2)}, {"i": 2, "c": mpq(-1, 3)}, {"i": 3, "c": mpq(1, 2), "x0": mpq(1, 2)},
     {"i": 4, "c": mpq(2, 3), "a": mpq(-1, 2)}, {"i": 5, "c": mpq(1, 3)}, {"i": 2, "c": mpq(3, 5)}),
)


def _lemma7_divisor(b):
    spec, r, c = b.spec, b["r"], b["c"]
    total = Series.zero(spec)
    for h in range(0, r):
        w = q_coef(h, r)
        if w:
            total = total + B.frak_s(spec, h, _amono(b), c).scale(w)
    return total


_register(
    "lemma7",
    [("t-function", lambda b: B.t_function(b.spec, b["r"], _amono(b), b["c"])),
     ("divisor", _lemma7_divisor)],
    {"a": ParamSpec("formal|scalar", FORMAL),
     "r": ParamSpec("int", 1, "index of T", _small(6)),
     "c": ParamSpec("scalar", mpq(1, 2), "weight", _nonzero)},
    "T_{r,a,c}(1, q) = sum_h Q_{h,r} frak S_{h,a,c}",
    ({"r": 1, "c": mpq(1, 2)}, {"r": 2, "c": mpq(-1, 3)}, {"r": 3, "c": mpq(1, 2), "a": mpq(1, 3)},
     {"r": 4, "c": mpq(2, 5)}, {"r": 6, "c": mpq(1, 2)}),
)


def _t_deriv_lhs(b):
    ext = _with_y(b.spec, 1)
    x = Series.one(ext) + Series.var(ext, "y")
    return B.t_function(ext, b["r"], _amono(b), b["c"], x).slice("y", 1)


_register(
    "t-deriv",
    [("derivative", _t_deriv_lhs),
     ("shifted", lambda b: B.t_function(b.spec, b["r"] + 1, _amono(b), b["c"]).scale(b["r"]))],
    {"a": ParamSpec("formal|scalar", FORMAL),
     "r": ParamSpec("int", 1, "index of T", _small(6)),
     "c": ParamSpec("scalar", mpq(1, 2), "weight", _nonzero)},
    "d/dx T_{r,a,c}(x, q) at x = 1 equals r T_{r+1,a,c}(1, q)",
    ({"r": 1, "c": mpq(1, 2)}, {"r": 2, "c": mpq(-1, 3)}, {"r": 3, "c": mpq(2, 3), "a": mpq(1, 4)}, {"r": 2, "c": mpq(2, 5)}),
)


# -- classical preliminaries ---------------------------------------------------------------

def _z_mono(b, name="z"):
    return b.mono(name) if b.is_formal(name) else b.mono(name, 1)


def _prelim_qbinomial_lhs(b):
    spec = b.spec
    zero = ParamMonomial(0)
    return basic_hypergeom("2phi1", (b.mono("A"), zero), (zero,), _z_mono(b), spec.nt + 1, spec)


def _prelim_qbinomial_rhs(b):
    spec = b.spec
    A, z = b.mono("A"), _z_mono(b)
    return B.div_poch(B.mul_poch(Series.one(spec), A.times(z)), z)


_register(
    "prelim-qbinomial",
    [("series", _prelim_qbinomial_lhs), ("product", _prelim_qbinomial_rhs)],
    {"A": ParamSpec("formal|scalar", FORMAL),
     "z": ParamSpec("formal|scalar", FORMAL, "a scalar z0 stands for z = z0 q")},
    "sum (A)_n z^n/(q)_n = (Az)_inf/(z)_inf",
    ({}, {"A": mpq(1, 2)}, {"z": mpq(-1, 3)}, {"A": mpq(2, 5), "z": mpq(3, 7)}),
)


def _prelim_fine_lhs(b):
    spec = b.spec
    A, Bm, Cm, z = b.mono("A"), b.mono("B", 1), b.mono("C", 1), _z_mono(b)
    return basic_hypergeom("2phi1", (A, Bm), (Cm,), z, spec.nt + 1, spec)


def _prelim_fine_rhs(b):
    spec = b.spec
    A, Bm, Cm, z = b.mono("A"), b.mono("B", 1), b.mono("C", 1), _z_mono(b)
    c_over_b = ParamMonomial(as_scalar(b["C"]) / as_scalar(b["B"]))
    s = basic_hypergeom("2phi1", (c_over_b, z), (A.times(z),), Bm, spec.nt + 1, spec)
    s = B.mul_poch(s, A.times(z))
    s = B.mul_poch(s, Bm)
    s = B.div_poch(s, z)
    return B.div_poch(s, Cm)


_register(
    "prelim-fine",
    [("series", _prelim_fine_lhs), ("transformed", _prelim_fine_rhs)],
    {"A": ParamSpec("formal|scalar", mpq(1, 2)),
     "B": ParamSpec("scalar", mpq(1, 4), "B stands for B q", _nonzero),
     "C": ParamSpec("scalar", 1, "C stands for C q"),
     "z": ParamSpec("formal|scalar", 1, "a scalar z0 stands for z = z0 q")},
    "Heine's first transformation of 2phi1(A, B; C; z)",
    ({"A": mpq(1, 2), "B": mpq(1, 4), "C": 1, "z": 1},
     {"A": FORMAL, "B": mpq(-1, 3), "C": mpq(1, 2), "z": FORMAL},
     {"A": mpq(2, 5), "B": 3, "C": -2, "z": mpq(-1, 2)}),
)


def _qgauss_params(b):
    A, Bv, C0 = b["A"], b["B"], b["C"]
    return (ParamMonomial(A), ParamMonomial(Bv), ParamMonomial(C0, 1),
            ParamMonomial(as_scalar(C0) / (as_scalar(A) * as_scalar(Bv)), 1))


def _prelim_qgauss_lhs(b):
    A, Bm, Cm, z = _qgauss_params(b)
    return basic_hypergeom("2phi1", (A, Bm), (Cm,), z, b.spec.nt + 1, b.spec)


def _prelim_qgauss_rhs(b):
    A, Bm, Cm, z = _qgauss_params(b)
    s = Series.one(b.spec)
    s = B.mul_poch(s, ParamMonomial(Cm.coeff / A.coeff, 1))
    s = B.mul_poch(s, ParamMonomial(Cm.coeff / Bm.coeff, 1))
    s = B.div_poch(s, Cm)
    return B.div_poch(s, z)


_register(
    "prelim-qgauss",
    [("series", _prelim_qgauss_lhs), ("product", _prelim_qgauss_rhs)],
    {"A": ParamSpec("scalar", mpq(1, 2), "", _nonzero),
     "B": ParamSpec("scalar", mpq(1, 3), "", _nonzero),
     "C": ParamSpec("scalar", 1, "C stands for C q")},
    "q-Gauss sum 2phi1(A, B; C; C/(AB)) = (C/A)_inf (C/B)_inf/((C)_inf (C/(AB))_inf)",
    ({"A": mpq(1, 2), "B": mpq(1, 3), "C": 1}, {"A": mpq(-1, 3), "B": mpq(2, 5), "C": mpq(1, 2)},
     {"A": mpq(3, 7), "B": mpq(-5, 2), "C": mpq(2, 3)}),
)


def _three_phi_two_params(b):
    A, Bv, C = (as_scalar(b[n]) for n in ("A", "B", "C"))
    D0, E0 = as_scalar(b["D"]), as_scalar(b["E"])
    return A, Bv, C, D0, E0


def _prelim_3phi2_lhs(b):
    A, Bv, C, D0, E0 = _three_phi_two_params(b)
    z = ParamMonomial(D0 * E0 / (A * Bv * C), 2)
    return basic_hypergeom("3phi2", (ParamMonomial(A), ParamMonomial(Bv), ParamMonomial(C)),
                           (ParamMonomial(D0, 1), ParamMonomial(E0, 1)), z, b.spec.nt + 1, b.spec)


def _prelim_3phi2_rhs(b):
    A, Bv, C, D0, E0 = _three_phi_two_params(b)
    spec = b.spec
    s = basic_hypergeom("3phi2", (ParamMonomial(A), ParamMonomial(D0 / Bv, 1), ParamMonomial(D0 / C, 1)),
                        (ParamMonomial(D0, 1), ParamMonomial(D0 * E0 / (Bv * C), 2)),
                        ParamMonomial(E0 / A, 1), spec.nt + 1, spec)
    s = B.mul_poch(s, ParamMonomial(E0 / A, 1))
    s = B.mul_poch(s, ParamMonomial(D0 * E0 / (Bv * C), 2))
    s = B.div_poch(s, ParamMonomial(E0, 1))
    return B.div_poch(s, ParamMonomial(D0 * E0 / (A * Bv * C), 2))


_register(
    "prelim-3phi2",
    [("series", _prelim_3phi2_lhs), ("transformed", _prelim_3phi2_rhs)],
    {"A": ParamSpec("scalar", mpq(1, 2), "", _nonzero),
     "B": ParamSpec("scalar", mpq(1, 3), "", _nonzero),
     "C": ParamSpec("scalar", mpq(-1, 2), "", _nonzero),
     "D": ParamSpec("scalar", 1, "D stands for D q", _nonzero),
     "E": ParamSpec("scalar", mpq(2, 3), "E stands for E q", _nonzero)},
    "3phi2 transformation with argument DE/(ABC)",
    ({"A": mpq(1, 2), "B": mpq(1, 3), "C": mpq(-1, 2), "D": 1, "E": mpq(2, 3)},
     {"A": 2, "B": mpq(-3, 4), "C": mpq(1, 5), "D": mpq(1, 2), "E": -1},
     {"A": mpq(-1, 3), "B": 3, "C": mpq(2, 7), "D": mpq(3, 2), "E": mpq(1, 4)}),
)

_register(
    "chu-vandermonde",
    [("binomial", lambda b: B.chu_lhs(b.spec, b["k"])),
     ("convolution", lambda b: B.chu_rhs(b.spec, b["k"]))],
    {"k": ParamSpec("int", 2, "", _positive)},
    "C(k+n-1, k) = sum_r C(n, r) C(k-1, k-r)",
    ({"k": 1}, {"k": 5}, {"k": 12}),
)


# -- the T-recurrence generating function -----------------------------------------------

def _tgen_recurrence(b):
    spec, f = b.spec, b["f"]
    a = b.mono("a").as_series(spec)

    def fv(n):
        return sum(as_scalar(c) * mpq(n) ** e for e, c in enumerate(f))

    total = Series.zero(spec)
    t = Series.zero(spec)
    for n in range(1, spec.nq + 1):
        den = one_minus(b.mono("a").shifted(n), spec)
        t = (Series.const(spec, fv(n)) - a.scale(fv(n + 1)) + t * one_minus(ParamMonomial(1, n - 1), spec)
             if n >= 2 else Series.const(spec, fv(n)) - a.scale(fv(n + 1))) / den
        total = total + t.shift(1, q=n)
    return total


def _tgen_closed(b):
    spec, f = b.spec, b["f"]
    a = b.mono("a")

    def fv(k):
        return sum(as_scalar(c) * mpq(k) ** e for e, c in enumerate(f))

    total = Series.zero(spec)
    ratio = Series.one(spec)                   # prod_{i<=n} (a - q^i) / (q)_n
    for n in range(1, spec.nt + 1):
        ratio = ratio * (a.as_series(spec) - B.qpow(spec, n)) / one_minus(ParamMonomial(1, n), spec)
        if ratio.is_zero():
            break
        inner = Series(spec, {(n * (k - 1),) + (0,) * (spec.nvars - 1): fv(k)
                              for k in range(1, spec.nq // max(n, 1) + 2) if n * (k - 1) <= spec.nq})
        total = total + ratio * inner
    # the a f(1) term of the shifted recurrence contributes the constant a f(1)/(1 - a)
    f1 = fv(1)
    if f1:
        total = total - binom_expand(a.as_series(spec), 1).scale(f1) + Series.const(spec, f1)
    return -total


_register(
    "t-generating",
    [("recurrence", _tgen_recurrence), ("closed", _tgen_closed)],
    {"a": ParamSpec("formal", FORMAL),
     "f": ParamSpec("rational-list", (0, 1), "coefficients of the polynomial f(n)", _nonempty)},
    "sum t_n q^n for the first-order recurrence in n against -sum (q/a)_n (a/q)^n F(q^n)/(q)_n + a f(1)/(1-a)",
    ({"f": (1,)}, {"f": (0, 1)}, {"f": (0, 0, 1)}, {"f": (-1, 1)}, {"f": (2, 0, 1)}),
)
