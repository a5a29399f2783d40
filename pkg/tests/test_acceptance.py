"""Acceptance criteria 1-10. Each check prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import random
import time
from itertools import product

import pytest
from gmpy2 import mpq

from qdivisor.combinatorics import coeff_A, coeff_C, dilcher_coeffs, divisor_sigma, stirling1
from qdivisor.identities import build_side, get_identity, list_identities, verify_identity
from qdivisor.partitions import partition_divisor_sum
from qdivisor.series import Series, univariate
from qdivisor.stochastic import (DagModel, dag_enumerate_exact, dag_exact_gap_mean, dag_pmf_table, dag_sample,
                                 divisor_series_value, heap_sample, limit_verify)


def _first_failure(checks):
    for label, ok in checks:
        if not ok:
            return label
    return None


def _verify_all(ident, param_list, order):
    d = get_identity(ident)
    bad = []
    for params in param_list:
        r = verify_identity(d, d.bind(params, order, order))
        if not r.passed:
            bad.append((ident, params, r.mismatch))
    return bad


# -- 1 ---------------------------------------------------------------------------------------

def check_1():
    start = time.perf_counter()
    bad, count = [], 0
    for d in list_identities():
        if d.id == "dilcher-original-discrepancy":
            continue
        bad += _verify_all(d.id, d.suite, 30)
        count += len(d.suite)
    secs = time.perf_counter() - start
    ok = not bad and secs < 300
    return ok, f"{count - len(bad)}/{count} suite checks pass at Nq=Nt=30 in {secs:.1f}s" + (f"; first failure {bad[0]}" if bad else "")


# -- 2 ---------------------------------------------------------------------------------------

THREE_WAY = {
    "uchimura-3way": [{}],
    "dilcher-1": [{"k": k} for k in range(1, 6)],
    "eulerian-3way": [{"m": m, "c": c} for m in range(1, 6) for c in (mpq(1, 2), mpq(-1, 3), 1)],
    "entry4-uchimura-type": [{"c": c} for c in (mpq(1, 2), mpq(-1, 3), mpq(2, 5))],
    "uchimura-mm-3way": [{"m": m} for m in range(1, 6)],
    "finite-uchimura": [{"N": n} for n in range(1, 11)],
}


def check_2():
    bad, count = [], 0
    for ident, params in THREE_WAY.items():
        assert len(get_identity(ident).sides) == 3
        bad += _verify_all(ident, params, 30)
        count += len(params)
    return not bad, f"{count - len(bad)}/{count} three-sided checks agree pairwise at Nq=30" + (f"; {bad[0]}" if bad else "")


# -- 3 ---------------------------------------------------------------------------------------

def check_3():
    u2, u3, d1 = get_identity("uchimura-2var"), get_identity("uchimura-3way"), get_identity("dilcher-1")
    checks = []
    b = u2.bind({"alpha": 1, "r": 1}, 30)
    for side in ("ramanujan", "uchimura"):
        checks.append((f"(1,1) {side}", build_side(u2, side, b) == build_side(u3, side, u3.bind({}, 30))))
    for k in range(1, 5):
        b = u2.bind({"alpha": k, "r": k}, 30)
        for side in ("ramanujan", "uchimura"):
            checks.append((f"({k},{k}) {side}", build_side(u2, side, b) == build_side(d1, side, d1.bind({"k": k}, 30))))
    fail = _first_failure(checks)
    return fail is None, f"{sum(ok for _, ok in checks)}/{len(checks)} side builds coincide" + (f"; first failure {fail}" if fail else "")


# -- 4 ---------------------------------------------------------------------------------------

def check_4():
    start = time.perf_counter()
    bad = [(n, m, c) for c in (mpq(1), mpq(1, 2), mpq(-1, 3)) for n in range(1, 41) for m in range(5)
           if partition_divisor_sum(n, m, c) != divisor_sigma(m, c, n)]
    secs = time.perf_counter() - start
    return not bad and secs < 60, f"600 partition sums checked in {secs:.2f}s, {len(bad)} mismatches"


# -- 5 ---------------------------------------------------------------------------------------

def check_5():
    T = dilcher_coeffs(9, 6)
    checks = []
    for r in range(1, 7):
        for j in range(1, 9):
            for t in range(j):
                checks.append((f"A-rec {j},{r},{t}",
                               coeff_A(j, r, t) == (j + 1) * coeff_A(j + 1, r, t + 1) + (r + j - 1) * coeff_A(j, r, t + 1)))
            for t in range(j + 1):
                rhs = mpq(j + 1 - r, j + 1) * T.C[(j, r, t + 1)] if t + 1 <= j else mpq(0)
                rhs += mpq(1, j + 1) * T.C[(j, r, t)]
                checks.append((f"C-rec {j},{r},{t}", T.C[(j + 1, r, t + 1)] == rhs))
            a_sum = mpq((-1) ** (j - 1), math.factorial(j - 1))
            for i in range(r - 1, r + j - 2):
                a_sum *= i
            c_sum = mpq((-1) ** (j - 1), math.factorial(j - 1))
            for i in range(2, j + 1):
                c_sum *= r - i
            checks.append((f"A-row {j},{r}", sum(T.A[(j, r, t)] for t in range(1, j + 1)) == a_sum))
            checks.append((f"C-row {j},{r}", sum(T.C[(j, r, t)] for t in range(1, j + 1)) == c_sum))
            checks.append((f"diag {j},{r}", T.C[(j, r, j)] == T.A[(j, r, j)] == mpq(1, math.factorial(j))))
    for k in range(1, 9):
        checks.append((f"a-sum {k}", sum(T.a(k, t) for t in range(1, k + 1)) == 1))
    for j in range(2, 9):
        checks.append((f"s-sum {j}", sum(stirling1(j, t) for t in range(1, j + 1)) == 0))
    fail = _first_failure(checks)
    return fail is None, f"{sum(ok for _, ok in checks)}/{len(checks)} table identities hold" + (f"; first failure {fail}" if fail else "")


# -- 6 ---------------------------------------------------------------------------------------

def check_6():
    groups = {
        "lemma5": get_identity("lemma5").suite,
        "lemma6": [{"i": i, "c": c} for i, c in zip(range(1, 6), (mpq(1, 2), mpq(-1, 3), mpq(2, 5), mpq(1, 2), mpq(-1, 3)))],
        "lemma7": [{"r": r, "c": c} for r, c in zip(range(1, 7), (mpq(1, 2), mpq(-1, 3), mpq(2, 5), mpq(1, 2), mpq(-1, 3), 1))],
        "t-deriv": get_identity("t-deriv").suite,
        "gk-pk-2var": [{"k": k, "c": c} for k in range(1, 5) for c in (mpq(1, 3), mpq(-1, 4))],
        "acs-pk": [{"k": k} for k in range(1, 5)],        # a -> 0 slice
        "gk-pk": [{"k": k} for k in range(1, 5)],         # c = 1 slice
    }
    bad, count = [], 0
    for ident, params in groups.items():
        bad += _verify_all(ident, params, 25)
        count += len(params)
    return not bad, f"{count - len(bad)}/{count} chain checks pass at Nq=Nt=25" + (f"; {bad[0]}" if bad else "")


# -- 7 ---------------------------------------------------------------------------------------

def check_7():
    checks = []
    for p in (mpq(1, 2), mpq(1, 3), mpq(3, 7)):
        for n in range(1, 5):
            checks.append((f"enum n={n} p={p}", dag_enumerate_exact(DagModel(n, p)) == dag_pmf_table(DagModel(n, p))))
    for n in range(1, 31):
        checks.append((f"sum n={n}", sum(dag_pmf_table(DagModel(n, mpq(1, 2))).values()) == 1))
    fail = _first_failure(checks)
    return fail is None, f"{sum(ok for _, ok in checks)}/{len(checks)} exact DAG checks hold" + (f"; first failure {fail}" if fail else "")


# -- 8 ---------------------------------------------------------------------------------------

def check_8():
    parts = []
    gap = abs(float(dag_exact_gap_mean(DagModel(30, mpq(1, 2)))) - divisor_series_value(0, 0.5))
    parts.append(("exact gap n=30", gap < 1e-6, f"gap {gap:.1e}"))
    batch = dag_sample(DagModel(12, 0.5), 7, 200_000)
    mean, var = batch.gap_estimates()
    parts.append(("dag mean", mean.within(4), f"z {mean.z:+.2f}"))
    parts.append(("dag variance", var.within(5), f"z {var.z:+.2f}"))
    for q in (0.3, 0.5):
        s = heap_sample(q, 1, 1_000_000)
        for m, est in enumerate(s.cumulants(), 1):
            parts.append((f"heap q={q} K{m}", est.within(5), f"z {est.z:+.2f}"))
    ok = all(p[1] for p in parts)
    detail = "; ".join(f"{label} {'ok' if good else 'OUT'} ({info})" for label, good, info in parts)
    return ok, detail


# -- 9 ---------------------------------------------------------------------------------------

def check_9():
    runs = []
    for f in ([1], [0, 1], [0, 0, 1]):
        runs.append(("acs-poly", dict(f=f)))
        runs.append(("two-var-poly", dict(f=f)))
    for b in (-1, mpq(1, 2)):
        runs.append(("geometric-b", dict(b=b)))
    for mode in ("periodic", "ceiling"):
        for f in ([1, -1], [1, 0, -1], [2, 1], [0, 1, 1]):
            for a in ("zero", "formal"):
                runs.append((mode, dict(f=f, a=a)))
    bad = []
    for mode, cfg in runs:
        r = limit_verify(mode, nq=25, **cfg)
        if not r.passed:
            bad.append((mode, cfg, r.outcome))
    theta = limit_verify("geometric-b", b=-1, nq=15).limit
    want = Series(univariate(15), {(n * n,): (-1) ** n for n in range(1, 4)})
    theta_ok = theta == want
    ok = not bad and theta_ok
    return ok, f"{len(runs) - len(bad)}/{len(runs)} limits match at Nq=25; b=-1 theta series {'ok' if theta_ok else 'WRONG'}" + (f"; {bad[0]}" if bad else "")


# -- 10 --------------------------------------------------------------------------------------

def check_10(trials: int = 50, seed: int = 20240611):
    rng = random.Random(seed)
    pool = [d for d in list_identities() if not d.expected_fail]
    wrong = []
    for _ in range(trials):
        d = rng.choice(pool)
        params = rng.choice(d.suite)
        b = d.bind(params, 10, 12)
        side = rng.choice(d.side_names)
        spec = b.spec
        monos = [e for e in product(*(range(spec.nt + 1) for _ in spec.names)) if spec.contains(e)]
        target = rng.choice(monos)
        delta = mpq(rng.choice([-3, -1, 1, 2, 5]), rng.choice([1, 2, 7]))
        bump = Series(spec, {target: delta})
        r = verify_identity(d, b, overrides={side: lambda s, bump=bump: s + bump})
        if r.outcome != "fail" or tuple(r.mismatch["exponents"]) != target:
            wrong.append((d.id, side, target, r.mismatch))
    return not wrong, f"{trials - len(wrong)}/{trials} perturbations located exactly" + (f"; first miss {wrong[0]}" if wrong else "")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10]


def _line(n: int, ok: bool, detail: str) -> str:
    return f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.slow
@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n, capsys):
    ok, detail = CHECKS[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for i, check in enumerate(CHECKS, 1):
        print(_line(i, *check()), flush=True)
