"""Probability models whose limits are divisor-type series.

* Uchimura's heap random variable X with Pr(X = n) = q^n (q^{n+1})_inf.
* The G_{n,p} random acyclic digraph and the reachability count gamma of
  vertex 1, with its exact distribution and a seeded Monte Carlo sampler.
* The first-order recurrences t_n(q) and t_n(a, q) and the limit theorems
  for Sum f(i) - t_n.

Monte Carlo uses numpy's PCG64 generator. A 64-bit seed feeds a
``SeedSequence`` that is spawned into one child stream per block of trials, so
a run is bit-reproducible on the same build regardless of ``jobs``.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq

from .combinatorics import divisor_sigma, limit_coeffs
from .identities.builders import div_poch, frak_s, gk_polynomial, gk_uchimura_sum, mul_poch
from .identities.registry import mismatch_record
from .scalars import Cyclo, as_scalar, format_rational
from .series import ParamMonomial, Series, VarSpec, binom_expand, one_minus, series_compare

BLOCK = 50_000
MAX_PERIOD = 12


# -- the heap random variable --------------------------------------------------------

def _check_q(q: float):
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")


def heap_pmf(q: float, n: int) -> float:
    """Pr(X = n) = q^n prod_{i>n} (1 - q^i), stopping once factors are within 1e-16 of 1."""
    _check_q(q)
    if n < 0:
        raise ValueError("n must be nonnegative")
    prod = 1.0
    i = n + 1
    while True:
        qi = q ** i
        if qi < 1e-16:
            break
        prod *= 1.0 - qi
        i += 1
    return q ** n * prod


@dataclass
class HeapDistribution:
    q: float
    pmf: np.ndarray = field(repr=False)
    residual: float

    @classmethod
    def build(cls, q: float, tol: float = 1e-17) -> "HeapDistribution":
        _check_q(q)
        # pmf(n) <= q^n, so the tail beyond N is below q^(N+1)/(1-q)
        cutoff = max(1, int(math.ceil(math.log(tol * (1 - q)) / math.log(q))))
        values = np.array([heap_pmf(q, n) for n in range(cutoff + 1)])
        residual = max(0.0, 1.0 - float(values.sum()))
        return cls(q, values, residual)

    @property
    def cutoff(self) -> int:
        return len(self.pmf) - 1

    def moment(self, m: int) -> float:
        n = np.arange(len(self.pmf), dtype=float)
        return float((n ** m * self.pmf).sum())


def divisor_series_value(m: int, q: float, tol: float = 1e-18) -> float:
    """Numeric value of sum_n sigma_m(n) q^n, the cumulant K_{m+1} of X."""
    total, n = 0.0, 1
    while True:
        term = float(divisor_sigma(m, 1, n)) * q ** n
        total += term
        if n > 10 and term < tol * max(1.0, total):
            return total
        n += 1


@dataclass
class Estimate:
    value: float
    se: float
    exact: float

    @property
    def z(self) -> float:
        return (self.value - self.exact) / self.se if self.se > 0 else math.inf

    def within(self, k: float) -> bool:
        return abs(self.value - self.exact) <= k * self.se

    def to_json(self) -> dict:
        return {"estimate": self.value, "se": self.se, "exact": self.exact}


def _moment_estimates(x: np.ndarray) -> tuple[float, float, float, float, float, float]:
    x = x.astype(float)
    n = len(x)
    mean = float(x.mean())
    d = x - mean
    mu = [float((d ** k).mean()) for k in range(7)]
    var = mu[2]
    se_mean = math.sqrt(var / n)
    se_var = math.sqrt(max(mu[4] - var ** 2, 0.0) / n)
    se_k3 = math.sqrt(max(mu[6] - mu[3] ** 2 - 6 * mu[4] * mu[2] + 9 * mu[2] ** 3, 0.0) / n)
    return mean, se_mean, var, se_var, mu[3], se_k3


def _streams(seed: int, total: int):
    blocks = [BLOCK] * (total // BLOCK)
    if total % BLOCK:
        blocks.append(total % BLOCK)
    children = np.random.SeedSequence(seed).spawn(len(blocks))
    return [(np.random.Generator(np.random.PCG64(ss)), size) for ss, size in zip(children, blocks)]


@dataclass
class HeapSample:
    q: float
    seed: int
    samples: np.ndarray = field(repr=False)
    mean: Estimate
    variance: Estimate
    third_cumulant: Estimate

    def cumulants(self) -> list:
        return [self.mean, self.variance, self.third_cumulant]

    def histogram(self) -> dict:
        vals, counts = np.unique(self.samples, return_counts=True)
        return {str(int(v)): int(c) for v, c in zip(vals, counts)}

    def to_json(self) -> dict:
        return {
            "command": "simulate",
            "params": {"kind": "heap", "q": repr(self.q), "seed": str(self.seed),
                       "trials": str(len(self.samples))},
            "histogram": self.histogram(),
            "estimates": {f"K{m}": e.to_json() for m, e in enumerate(self.cumulants(), 1)},
        }


def heap_sample(q: float, seed: int, count: int, jobs: int = 1) -> HeapSample:
    """Inverse-CDF samples of X with cumulant estimates against sum sigma_{m-1}(n) q^n."""
    dist = HeapDistribution.build(q)
    cdf = np.cumsum(dist.pmf)
    cdf /= cdf[-1]

    def draw(stream):
        gen, size = stream
        return np.searchsorted(cdf, gen.random(size), side="right").astype(np.int64)

    streams = _streams(seed, count)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            parts = list(pool.map(draw, streams))
    else:
        parts = [draw(s) for s in streams]
    x = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    mean, se_m, var, se_v, k3, se_k3 = _moment_estimates(x)
    exact = [divisor_series_value(m, q) for m in range(3)]
    return HeapSample(q, seed, x, Estimate(mean, se_m, exact[0]), Estimate(var, se_v, exact[1]),
                      Estimate(k3, se_k3, exact[2]))


# -- the random acyclic digraph --------------------------------------------------------

@dataclass(frozen=True)
class DagModel:
    n: int
    p: object

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one vertex")
        if not 0 < self.p < 1:
            raise ValueError(f"edge probability must lie in (0, 1), got {self.p}")

    @property
    def q(self):
        return 1 - self.p


def _exact_model(model: DagModel) -> DagModel:
    if isinstance(model.p, float):
        raise TypeError("exact computations need a rational edge probability")
    return DagModel(model.n, as_scalar(model.p))


def dag_pmf_exact(model: DagModel, h: int):
    """Pr(gamma = h) = q^{n-h} prod_{j=1}^{h-1} (1 - q^{n-j})."""
    model = _exact_model(model)
    n, q = model.n, model.q
    if not 1 <= h <= n:
        raise ValueError(f"h must lie in 1..{n}, got {h}")
    out = q ** (n - h)
    for j in range(1, h):
        out *= 1 - q ** (n - j)
    return out


def dag_pmf_table(model: DagModel) -> dict:
    return {h: dag_pmf_exact(model, h) for h in range(1, model.n + 1)}


def _reach_count(n: int, edges) -> int:
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen)


def dag_enumerate_exact(model: DagModel) -> dict:
    """Exhaustive pmf over all 2^{C(n,2)} edge sets; n <= 5."""
    model = _exact_model(model)
    n, p = model.n, model.p
    if n > 5:
        raise ValueError("exhaustive enumeration is limited to n <= 5")
    pairs = list(combinations(range(n), 2))
    m = len(pairs)
    table = {h: mpq(0) for h in range(1, n + 1)}
    for mask in range(1 << m):
        edges = [pairs[i] for i in range(m) if mask >> i & 1]
        k = len(edges)
        table[_reach_count(n, edges)] += p ** k * (1 - p) ** (m - k)
    return table


def dag_exact_gap_mean(model: DagModel):
    """E(n - gamma) exactly."""
    return sum((model.n - h) * pr for h, pr in dag_pmf_table(_exact_model(model)).items())


@dataclass
class DagTrialBatch:
    n: int
    p: float
    seed: int
    trials: int
    histogram: dict            # gamma -> count

    def values(self) -> np.ndarray:
        return np.repeat(np.array(sorted(self.histogram), dtype=np.int64),
                         [self.histogram[h] for h in sorted(self.histogram)])

    def gap_estimates(self) -> tuple[Estimate, Estimate]:
        """Mean and variance of n - gamma against sum d(k) q^k and sum sigma(k) q^k."""
        x = self.n - self.values()
        mean, se_m, var, se_v, _, _ = _moment_estimates(x)
        q = 1 - self.p
        return (Estimate(mean, se_m, divisor_series_value(0, q)),
                Estimate(var, se_v, divisor_series_value(1, q)))

    def to_json(self) -> dict:
        return {
            "command": "simulate",
            "params": {"kind": "dag", "n": str(self.n), "p": repr(self.p), "seed": str(self.seed),
                       "trials": str(self.trials)},
            "histogram": {str(h): c for h, c in sorted(self.histogram.items())},
        }


def _dag_block(n: int, p: float, gen: np.random.Generator, size: int) -> np.ndarray:
    reach = np.zeros((size, n), dtype=bool)
    reach[:, 0] = True
    for j in range(1, n):
        edges = gen.random((size, j)) < p          # edges (i, j) for i < j
        reach[:, j] = (reach[:, :j] & edges).any(axis=1)
    return reach.sum(axis=1)


def dag_sample(model: DagModel, seed: int, trials: int, jobs: int = 1) -> DagTrialBatch:
    n, p = model.n, float(model.p)

    def run(stream):
        gen, size = stream
        return np.bincount(_dag_block(n, p, gen, size), minlength=n + 1)

    streams = _streams(seed, trials)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            counts = list(pool.map(run, streams))
    else:
        counts = [run(s) for s in streams]
    total = np.sum(counts, axis=0) if counts else np.zeros(n + 1, dtype=np.int64)
    hist = {h: int(total[h]) for h in range(1, n + 1) if total[h]}
    return DagTrialBatch(n, p, seed, trials, hist)


# -- recurrences and limit theorems ---------------------------------------------------

def poly_f(coeffs: Sequence) -> Callable:
    cs = [as_scalar(c) for c in coeffs]
    return lambda n: sum((c * mpq(n) ** k for k, c in enumerate(cs)), mpq(0))


def periodic_f(pattern: Sequence) -> Callable:
    ps = [as_scalar(x) for x in pattern]
    return lambda n: ps[(n - 1) % len(ps)]


def geometric_f(b) -> Callable:
    b = as_scalar(b)
    return lambda n: b ** n


@dataclass(frozen=True)
class RecurrenceState:
    """t_ell for t_n = f(n) + (1 - q^{n-1}) t_{n-1} (acs) or its two-variable version."""

    mode: str                  # "acs" | "two-var"
    f: Callable = field(repr=False)
    spec: VarSpec
    ell: int = 0
    t: Series | None = None
    partial: object = 0        # sum_{n <= ell} f(n)

    def __post_init__(self):
        if self.mode not in ("acs", "two-var"):
            raise ValueError(f"unknown recurrence mode {self.mode!r}")
        if self.mode == "two-var" and "a" not in self.spec.names:
            raise ValueError("two-var mode needs a formal variable a")
        if self.t is None:
            object.__setattr__(self, "t", Series.zero(self.spec))

    @classmethod
    def start(cls, mode: str, f: Callable, nq: int, nt: int | None = None) -> "RecurrenceState":
        names = ("q",) if mode == "acs" else ("q", "a")
        return cls(mode, f, VarSpec(names, nq, nq if nt is None else nt))

    def limit_expression(self) -> Series:
        """sum f - t_ell, or sum f - a f(ell+1)/(1-a) - (1 - a q^ell) t_ell/(1-a)."""
        spec = self.spec
        if self.mode == "acs":
            return Series.const(spec, self.partial) - self.t
        a = ParamMonomial.formal("a")
        inv = binom_expand(a.as_series(spec), 1)              # 1/(1-a)
        expr = Series.const(spec, self.partial)
        expr = expr - (inv - Series.one(spec)).scale(self.f(self.ell + 1))
        return expr - inv * (self.t - self.t * a.shifted(self.ell).as_series(spec))


def recurrence_advance(state: RecurrenceState) -> RecurrenceState:
    spec = state.spec
    n = state.ell + 1
    fn = state.f(n)
    prev = state.t * one_minus(ParamMonomial(1, n - 1), spec)
    if state.mode == "acs":
        t = Series.const(spec, fn) + prev
    else:
        a = ParamMonomial.formal("a")
        rhs = Series.const(spec, fn) - a.as_series(spec).scale(state.f(n + 1)) + prev
        t = rhs / one_minus(a.shifted(n), spec)
    return RecurrenceState(state.mode, state.f, spec, n, t, state.partial + fn)


def periodic_ck(pattern: Sequence) -> list:
    """c_k = (1/N) sum_j f(j) zeta_N^{(1-j)k}, exact in Q(zeta_N)."""
    N = len(pattern)
    if N < 1:
        raise ValueError("empty pattern")
    out = []
    for k in range(N):
        total = Cyclo(N, [0])
        for j, v in enumerate(pattern, start=1):
            total = total + Cyclo.zeta(N, (1 - j) * k) * as_scalar(v)
        out.append(total * mpq(1, N))
    return out


def periodic_reconstruct(ck: Sequence) -> list:
    """Inverse transform: f(j) = sum_k c_k zeta_N^{(j-1)k}."""
    N = len(ck)
    vals = []
    for j in range(1, N + 1):
        total = Cyclo(N, [0])
        for k, c in enumerate(ck):
            total = total + c * Cyclo.zeta(N, (j - 1) * k)
        vals.append(total.to_rational() if total.is_rational() else total)
    return vals


def _rationalize(s: Series) -> Series:
    def conv(c):
        if isinstance(c, Cyclo):
            if not c.is_rational():
                raise ArithmeticError("closed form has an irrational coefficient")
            return c.to_rational()
        return c
    return s.map_coefficients(conv)


def _closed_poly(spec: VarSpec, coeffs, a_formal: bool) -> Series:
    h = limit_coeffs(coeffs)
    a = ParamMonomial.formal("a") if a_formal else None
    total = Series.zero(spec)
    for j, hj in enumerate(h, start=1):
        if hj:
            total = total + gk_polynomial(spec, j, a).scale(hj)
    return total


def _closed_geometric(spec: VarSpec, b) -> Series:
    b = as_scalar(b)
    s = mul_poch(Series.const(spec, -b), ParamMonomial(1, 1))
    return div_poch(s, ParamMonomial(b)) + Series.const(spec, b / (1 - b))


def _closed_periodic(spec: VarSpec, pattern, a_formal: bool) -> Series:
    N = len(pattern)
    ck = periodic_ck(pattern)
    a = ParamMonomial.formal("a") if a_formal else None
    total = frak_s(spec, 0, a).scale(ck[0].to_rational())
    inner = Series.zero(spec)
    for k in range(1, N):
        if not ck[k]:
            continue
        z = Cyclo.zeta(N, k)
        total = total + Series.const(spec, ck[k] / (1 - z))
        part = Series.const(spec, ck[k])
        if a is not None:
            part = mul_poch(part, a.scaled(z))
        part = div_poch(part, ParamMonomial(z))
        inner = inner + part
    inner = mul_poch(inner, ParamMonomial(1, 1))
    if a is not None:
        inner = div_poch(inner, a)
    return _rationalize(total - inner)


def _closed_ceiling(spec: VarSpec, pattern, a_formal: bool) -> Series:
    N = len(pattern)
    f = [as_scalar(x) for x in pattern]
    a = ParamMonomial.formal("a") if a_formal else ParamMonomial(0)

    def weight(n):
        return sum((f[j - 1] * (-((j - n - 1) // N)) for j in range(1, N + 1)), mpq(0))

    s = gk_uchimura_sum(spec, a, weight)
    s = mul_poch(s, ParamMonomial(1, 1))
    return div_poch(s, a) if a_formal else s


LIMIT_MODES = ("acs-poly", "two-var-poly", "periodic", "geometric-b", "ceiling")


@dataclass
class LimitReport:
    mode: str
    config: dict
    nq: int
    nt: int
    outcome: str                # pass | fail | unstable
    stabilization_index: int | None
    mismatch: dict | None = None
    millis: float = 0.0
    limit: Series | None = field(default=None, repr=False)
    closed_form: Series | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"

    def to_json(self) -> dict:
        rec = {
            "command": "limit",
            "id": self.mode,
            "params": {k: _fmt(v) for k, v in self.config.items()},
            "nq": self.nq,
            "nt": self.nt,
            "outcome": self.outcome,
            "millis": round(self.millis, 3),
        }
        if self.stabilization_index is not None:
            rec["stabilization_index"] = self.stabilization_index
        if self.mismatch is not None:
            rec["mismatch"] = self.mismatch
        return rec


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(v).lower()
    return format_rational(as_scalar(v))


def limit_verify(mode: str, *, f: Sequence | None = None, b=None, a: str = "zero",
                 nq: int = 25, nt: int | None = None) -> LimitReport:
    """Advance the recurrence until the limit expression stabilizes and compare it with the closed form.

    ``f`` is a coefficient list (c_0, c_1, ...) for the polynomial modes and a
    period pattern (f(1), ..., f(N)) for periodic and ceiling; ``b`` is the base
    for geometric-b; ``a`` is "formal" or "zero".
    """
    if mode not in LIMIT_MODES:
        raise ValueError(f"unknown limit mode {mode!r}; expected one of {LIMIT_MODES}")
    if a not in ("formal", "zero"):
        raise ValueError("a must be 'formal' or 'zero'")
    start = time.perf_counter()
    nt = nq if nt is None else nt
    a_formal = a == "formal" or mode == "two-var-poly"
    if mode == "acs-poly" and a_formal:
        raise ValueError("acs-poly has no a parameter; use two-var-poly")
    if mode == "geometric-b":
        if b is None or as_scalar(b) == 1:
            raise ValueError("geometric-b needs a base b != 1")
        if a_formal:
            raise ValueError("geometric-b is a one-variable theorem")
        fn = geometric_f(b)
        config = {"b": b}
    elif mode in ("periodic", "ceiling"):
        if not f:
            raise ValueError(f"{mode} needs a period pattern f")
        if len(f) > MAX_PERIOD:
            raise ValueError(f"period N = {len(f)} exceeds the supported maximum {MAX_PERIOD}")
        fn = periodic_f(f)
        config = {"f": list(f), "a": a}
    else:
        if not f:
            raise ValueError(f"{mode} needs polynomial coefficients f")
        fn = poly_f(f)
        config = {"f": list(f), "a": "formal" if a_formal else "zero"}
    state = RecurrenceState.start("two-var" if a_formal else "acs", fn, nq, nt)
    spec = state.spec

    history = []
    index = None
    max_steps = 4 * max(nt, nq) + 4
    while state.ell < max_steps:
        state = recurrence_advance(state)
        history.append(state.limit_expression())
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            index = state.ell - 2
            break
    limit = history[-1]

    if mode in ("acs-poly", "two-var-poly"):
        closed = _closed_poly(spec, f, a_formal)
    elif mode == "geometric-b":
        closed = _closed_geometric(spec, b)
    elif mode == "periodic":
        closed = _closed_periodic(spec, f, a_formal)
    else:
        closed = _closed_ceiling(spec, f, a_formal)

    mismatch = None
    if index is None:
        outcome = "unstable"
    else:
        mm = series_compare(limit, closed)
        outcome = "pass" if mm is None else "fail"
        if mm is not None:
            mismatch = mismatch_record(spec, mm, "limit", "closed-form")
    millis = (time.perf_counter() - start) * 1000
    return LimitReport(mode, config, nq, nt, outcome, index, mismatch, millis, limit, closed)


__all__ = [
    "DagModel", "DagTrialBatch", "Estimate", "HeapDistribution", "HeapSample", "LimitReport",
    "RecurrenceState", "dag_enumerate_exact", "dag_exact_gap_mean", "dag_pmf_exact", "dag_pmf_table",
    "dag_sample", "divisor_series_value", "heap_pmf", "heap_sample", "limit_verify", "periodic_ck",
    "periodic_reconstruct", "recurrence_advance",
]
