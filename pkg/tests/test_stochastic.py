import math

import numpy as np
import pytest
from gmpy2 import mpq

from qdivisor.combinatorics import divisor_sigma
from qdivisor.scalars import Cyclo
from qdivisor.series import ParamMonomial, Series, VarSpec, binom_expand, univariate
from qdivisor.stochastic import (DagModel, HeapDistribution, RecurrenceState, dag_enumerate_exact,
                                 dag_exact_gap_mean, dag_pmf_exact, dag_pmf_table, dag_sample,
                                 divisor_series_value, heap_pmf, heap_sample, limit_verify, periodic_ck,
                                 periodic_reconstruct, poly_f, recurrence_advance)


def qq_inf(q):
    return math.prod(1 - q ** i for i in range(1, 200))


# -- heap variable -----------------------------------------------------------------------

def test_heap_pmf_at_zero():
    assert heap_pmf(0.5, 0) == pytest.approx(qq_inf(0.5), rel=1e-14)


def test_heap_normalization_and_mean():
    dist = HeapDistribution.build(0.5)
    assert abs(dist.pmf.sum() - 1) < 1e-10
    assert abs(dist.pmf.sum() + dist.residual - 1) < 1e-12
    assert (dist.pmf >= 0).all()
    d_series = sum(float(divisor_sigma(0, 1, n)) * 0.5 ** n for n in range(1, 80))
    assert abs(dist.moment(1) - d_series) < 1e-8


def test_heap_variance_closed_form():
    dist = HeapDistribution.build(0.3)
    var = dist.moment(2) - dist.moment(1) ** 2
    assert var == pytest.approx(divisor_series_value(1, 0.3), rel=1e-10)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2])
def test_heap_rejects_bad_q(q):
    with pytest.raises(ValueError):
        heap_pmf(q, 1)


def test_heap_sampling_is_deterministic():
    a = heap_sample(0.5, 11, 120_000)
    b = heap_sample(0.5, 11, 120_000, jobs=3)
    assert np.array_equal(a.samples, b.samples)
    assert a.to_json() == b.to_json()
    c = heap_sample(0.5, 12, 120_000)
    assert not np.array_equal(a.samples, c.samples)


def test_heap_small_run_cumulants():
    s = heap_sample(0.3, 5, 200_000)
    for est in s.cumulants():
        assert est.within(5)


# -- digraph model -----------------------------------------------------------------------------

def test_dag_small_cases():
    assert dag_pmf_exact(DagModel(1, mpq(1, 3)), 1) == 1
    p = mpq(2, 7)
    assert dag_pmf_table(DagModel(2, p)) == {1: 1 - p, 2: p}
    assert dag_enumerate_exact(DagModel(2, p)) == {1: 1 - p, 2: p}
    assert dag_enumerate_exact(DagModel(3, p)) == dag_pmf_table(DagModel(3, p))


def test_dag_exact_matches_enumeration():
    for p in (mpq(1, 2), mpq(1, 3), mpq(3, 7)):
        for n in range(1, 5):
            assert dag_enumerate_exact(DagModel(n, p)) == dag_pmf_table(DagModel(n, p))
        assert dag_enumerate_exact(DagModel(4, p)) == dag_pmf_table(DagModel(4, p))


def test_dag_normalization():
    for n in range(1, 31):
        assert sum(dag_pmf_table(DagModel(n, mpq(1, 2))).values()) == 1
        assert sum(dag_pmf_table(DagModel(n, mpq(2, 9))).values()) == 1


def test_dag_errors():
    with pytest.raises(ValueError):
        DagModel(0, mpq(1, 2))
    with pytest.raises(ValueError):
        DagModel(3, mpq(3, 2))
    with pytest.raises(ValueError):
        dag_pmf_exact(DagModel(3, mpq(1, 2)), 4)
    with pytest.raises(ValueError):
        dag_enumerate_exact(DagModel(6, mpq(1, 2)))
    with pytest.raises(TypeError):
        dag_pmf_exact(DagModel(3, 0.5), 1)


def test_dag_gap_converges_monotonically():
    target = divisor_series_value(0, 0.5)
    gaps = [abs(float(dag_exact_gap_mean(DagModel(n, mpq(1, 2)))) - target) for n in range(2, 31)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-6


def test_dag_sampler_single_vertex():
    batch = dag_sample(DagModel(1, 0.5), 3, 1000)
    assert batch.histogram == {1: 1000}


def test_dag_sampler_deterministic():
    a = dag_sample(DagModel(8, 0.4), 99, 60_000)
    b = dag_sample(DagModel(8, 0.4), 99, 60_000, jobs=2)
    assert a == b and a.to_json() == b.to_json()
    assert sum(a.histogram.values()) == 60_000


def test_dag_sampler_matches_finite_n_law():
    # compare with the exact distribution at n = 12 rather than with the n -> infinity limit
    n = 12
    batch = dag_sample(DagModel(n, 0.5), 7, 200_000)
    pmf = dag_pmf_table(DagModel(n, mpq(1, 2)))
    mean = sum((n - h) * float(p) for h, p in pmf.items())
    var = sum((n - h) ** 2 * float(p) for h, p in pmf.items()) - mean ** 2
    m_est, v_est = batch.gap_estimates()
    assert abs(m_est.value - mean) <= 4 * m_est.se
    assert abs(v_est.value - var) <= 5 * v_est.se
    # chi-square over the well-populated cells
    expected = {h: float(p) * batch.trials for h, p in pmf.items()}
    cells = [h for h in expected if expected[h] >= 20]
    chi2 = sum((batch.histogram.get(h, 0) - expected[h]) ** 2 / expected[h] for h in cells)
    assert chi2 < len(cells) + 5 * math.sqrt(2 * len(cells))


# -- recurrences --------------------------------------------------------------------------------

def test_recurrence_first_steps_acs():
    st = RecurrenceState.start("acs", poly_f([1]), 6)
    st = recurrence_advance(st)
    assert st.t == Series.one(st.spec)
    st = recurrence_advance(recurrence_advance(st))
    assert st.ell == 3
    want = Series(st.spec, {(0,): 3, (1,): -1, (2,): -2, (3,): 1})
    assert st.t == want


def test_recurrence_first_step_two_var():
    f = poly_f([0, 1])
    st = recurrence_advance(RecurrenceState.start("two-var", f, 6))
    spec = st.spec
    a = Series.var(spec, "a")
    want = (Series.one(spec) - a.scale(2)) * binom_expand(a.shift(q=1), 1)
    assert st.t == want


def test_recurrence_mode_checked():
    with pytest.raises(ValueError):
        RecurrenceState("three-var", poly_f([1]), univariate(3))
    with pytest.raises(ValueError):
        RecurrenceState("two-var", poly_f([1]), univariate(3))


def test_periodic_transform():
    ck = periodic_ck([1, 1])
    assert ck[0] == 1 and ck[1] == 0
    for pattern in ([1, -1], [1, 0, -1], [2, mpq(1, 3), 0, -5], [1, 2, 3, 4, 5, 6, 7]):
        ck = periodic_ck(pattern)
        assert all(isinstance(c, Cyclo) for c in ck)
        assert periodic_reconstruct(ck) == [mpq(x) for x in pattern]


# -- limit theorems ------------------------------------------------------------------------------

def test_acs_constant_gives_divisor_series():
    r = limit_verify("acs-poly", f=[1], nq=20)
    assert r.passed
    assert r.limit == Series(univariate(20), {(n,): divisor_sigma(0, 1, n) for n in range(1, 21)})


def test_geometric_minus_one_gives_theta_series():
    r = limit_verify("geometric-b", b=-1, nq=15)
    assert r.passed
    assert r.limit == Series(univariate(15), {(1,): -1, (4,): 1, (9,): -1})


@pytest.mark.parametrize("f", [[1], [0, 1], [0, 0, 1], [2, 1]])
def test_two_var_slice_reproduces_one_variable_limit(f):
    one = limit_verify("acs-poly", f=f, nq=15)
    two = limit_verify("two-var-poly", f=f, nq=15)
    assert one.passed and two.passed
    assert two.limit.slice("a", 0) == one.limit


def test_periodic_cross_oracle():
    # the pattern (1, -1) is f(n) = -(-1)^n, the negative of the b = -1 sequence
    per = limit_verify("periodic", f=[1, -1], a="formal", nq=15)
    flip = limit_verify("periodic", f=[-1, 1], a="formal", nq=15)
    geo = limit_verify("geometric-b", b=-1, nq=15)
    assert per.passed and flip.passed and geo.passed
    assert per.closed_form.slice("a", 0) == -geo.closed_form
    assert flip.closed_form.slice("a", 0) == geo.closed_form


@pytest.mark.parametrize("f", [[1], [0, 1], [0, 0, 1], [2, 1]])
def test_acs_poly_to_25(f):
    assert limit_verify("acs-poly", f=f, nq=25).passed


def test_limit_argument_errors():
    with pytest.raises(ValueError):
        limit_verify("nope", f=[1])
    with pytest.raises(ValueError):
        limit_verify("geometric-b", b=1)
    with pytest.raises(ValueError):
        limit_verify("periodic", f=list(range(13)))
    with pytest.raises(ValueError):
        limit_verify("acs-poly", f=[1], a="formal")


def test_limit_report_json():
    rec = limit_verify("ceiling", f=[1, 0, -1], nq=10).to_json()
    assert rec["command"] == "limit" and rec["outcome"] == "pass"
    assert rec["params"]["f"] == "1,0,-1"
