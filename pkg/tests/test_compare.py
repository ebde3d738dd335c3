import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from churnkit.compare import (
    P_FLOOR,
    WeightSpec,
    logrank,
    logrank_terms,
    stratified_logrank,
)
from churnkit.errors import DegenerateDataError, InvalidInputError
from churnkit.nonparam import kaplan_meier

from .strategies import cohort_of, cohorts


def hypergeometric_moments(n0, n1, d):
    """Mean and variance of control events by enumerating every split of d."""
    n = n0 + n1
    probs = {k: comb(n0, k) * comb(n1, d - k) / comb(n, d) for k in range(max(0, d - n1), min(d, n0) + 1)}
    mean = sum(k * p for k, p in probs.items())
    var = sum((k - mean) ** 2 * p for k, p in probs.items())
    return mean, var


class TestTerms:
    def test_two_by_two(self):
        res = logrank(cohort_of([1.0, 2.0], [False, True]), cohort_of([2.0, 2.0], [True, True]))
        assert res.terms["expected"].tolist() == [0.5]
        assert res.terms["variance"].tolist() == [0.25]
        assert (res.U, res.var_u, res.chi2) == (0.5, 0.25, 1.0)
        mean, var = hypergeometric_moments(2, 2, 1)
        assert (mean, var) == (0.5, 0.25)

    @settings(max_examples=60)
    @given(cohorts(min_size=1, max_size=12), cohorts(min_size=1, max_size=12))
    def test_against_enumeration(self, a, b):
        terms = logrank_terms(a, b)
        for n0, n1, d0, d1, e, v in zip(*(terms[k] for k in ("n0", "n1", "d0", "d1", "expected", "variance"))):
            mean, var = hypergeometric_moments(int(n0), int(n1), int(d0 + d1))
            assert e == pytest.approx(mean, abs=1e-12)
            assert v == pytest.approx(var, abs=1e-12)
            assert 0 <= e <= min(n0, d0 + d1) and v >= 0

    def test_weights_use_left_pooled_km(self):
        a, b = cohort_of([1.0, 2.0, 3.0]), cohort_of([1.5, 2.5, 3.5])
        terms = logrank_terms(a, b, WeightSpec(1.0))
        km = kaplan_meier(a.merged(b))
        np.testing.assert_allclose(terms["weight"], 6 * km.curve.left_limit(terms["time"]))

    def test_rho_validated(self):
        for bad in (-0.5, math.inf, math.nan):
            with pytest.raises(InvalidInputError):
                WeightSpec(bad)


class TestLogRank:
    def test_identical_cohorts(self, ten):
        res = logrank(ten, ten)
        assert res.U == pytest.approx(0.0, abs=1e-12)
        assert res.chi2 == pytest.approx(0.0, abs=1e-20)
        assert res.p_value == 1.0

    def test_errors(self, ten):
        with pytest.raises(InvalidInputError):
            logrank(ten, cohort_of([]))
        with pytest.raises(DegenerateDataError):
            logrank(cohort_of([1.0], [True]), cohort_of([2.0], [True]))

    def test_underflow_flag(self):
        a = cohort_of(np.arange(1, 3001) / 1000.0)
        b = cohort_of(100 + np.arange(1, 3001) / 1000.0)
        res = logrank(a, b)
        assert res.underflow and res.p_value == P_FLOOR and res.p_value > 0

    def test_invariants(self, ten):
        other = ten.scaled(1.7)
        res = logrank(ten, other)
        t = res.terms
        assert res.U == pytest.approx(float(np.sum(t["d0"] - t["expected"])))
        assert res.var_u == pytest.approx(float(np.sum(t["variance"])))
        assert res.var_u_linear == res.var_u
        assert res.chi2 >= 0 and 0 < res.p_value <= 1
        w = logrank(ten, other, WeightSpec(1.0))
        assert w.var_u == pytest.approx(float(np.sum(w.terms["weight"] ** 2 * w.terms["variance"])))
        assert w.var_u_linear == pytest.approx(float(np.sum(w.terms["weight"] * w.terms["variance"])))

    @given(cohorts(min_size=1, min_events=1), cohorts(min_size=1))
    def test_swap_negates_u(self, a, b):
        ab, ba = logrank(a, b), logrank(b, a)
        assert ba.U == pytest.approx(-ab.U, abs=1e-9)
        assert ba.chi2 == pytest.approx(ab.chi2, rel=1e-9, abs=1e-12)
        assert ba.p_value == pytest.approx(ab.p_value, rel=1e-9)

    @given(cohorts(min_size=1, min_events=1), cohorts(min_size=1))
    def test_rho_zero_matches_plain(self, a, b):
        plain, weighted = logrank(a, b), logrank(a, b, WeightSpec(0.0))
        assert weighted.chi2 == pytest.approx(plain.chi2, rel=1e-9, abs=1e-12)

    @given(cohorts(min_size=1, min_events=1), cohorts(min_size=1))
    def test_merged_against_itself(self, a, b):
        pooled = a.merged(b)
        assert logrank(pooled, pooled).p_value == pytest.approx(1.0, abs=1e-12)

    @given(cohorts(min_size=1, min_events=1), cohorts(min_size=1), st.randoms(use_true_random=False))
    def test_order_invariant(self, a, b, rnd):
        order = list(range(a.size))
        rnd.shuffle(order)
        assert logrank(a.subset(order), b).chi2 == pytest.approx(logrank(a, b).chi2, rel=1e-12, abs=1e-15)


class TestStratified:
    def test_single_stratum(self, ten):
        other = ten.scaled(0.6)
        plain, strat = logrank(ten, other), stratified_logrank([(ten, other)])
        assert (strat.U, strat.var_u, strat.chi2) == (plain.U, plain.var_u, plain.chi2)

    def test_two_copies_double(self, ten):
        other = ten.scaled(0.6)
        plain, strat = logrank(ten, other), stratified_logrank([(ten, other), (ten, other)])
        assert strat.U == pytest.approx(2 * plain.U)
        assert strat.var_u == pytest.approx(2 * plain.var_u)
        assert strat.chi2 == pytest.approx(2 * plain.chi2)

    def test_eventless_stratum_ignored(self, ten):
        other = ten.scaled(0.6)
        dead = (cohort_of([1.0], [True]), cohort_of([2.0], [True]))
        strat = stratified_logrank([(ten, other), dead])
        assert strat.chi2 == logrank(ten, other).chi2
        assert strat.strata[1] == (0.0, 0.0)

    def test_all_degenerate(self):
        with pytest.raises(DegenerateDataError):
            stratified_logrank([(cohort_of([1.0], [True]), cohort_of([1.0], [True]))])
        with pytest.raises(DegenerateDataError):
            stratified_logrank([])
