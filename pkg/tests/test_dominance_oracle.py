"""Enumeration of accessible-state sets and oracle equivalence of the
optimized dominance procedures on small instances."""

import itertools
import random
from fractions import Fraction

import pytest

from ldvote import (
    ABSTAIN,
    AccessibleStateSet,
    BallotProfile,
    EnumerationBudgetError,
    Metric,
    PreferenceOrder,
    VoterType,
    accessible_set,
    accessible_states_enumerate,
    dominating_set,
    possible_winners,
    s_beats,
    s_dominates,
    strategic_response,
)
from tests.oracles import (
    brute_dominating_set,
    brute_possible_winners,
    brute_response,
    brute_s_beats,
    brute_s_dominates,
    random_ballots,
    random_metric_radius,
    random_order,
)


class TestEnumeration:
    def test_zero_radius_is_base_only(self):
        sset = AccessibleStateSet((1, 0), Metric.L1, 0)
        assert list(accessible_states_enumerate(sset)) == [(1, 0)]

    def test_l1_radius_one(self):
        sset = AccessibleStateSet((1, 0), Metric.L1, 1)
        states = set(accessible_states_enumerate(sset))
        assert states == {(1, 0), (0, 0), (2, 0), (1, 1)}

    def test_em_one_transfer(self):
        sset = AccessibleStateSet((2, 1), Metric.EM, 1)
        states = set(accessible_states_enumerate(sset))
        assert states == {(2, 1), (1, 2), (3, 0)}

    def test_budget_guard(self):
        sset = AccessibleStateSet((100,) * 6, Metric.LINF, 50)
        with pytest.raises(EnumerationBudgetError) as err:
            list(accessible_states_enumerate(sset, budget=1000))
        assert err.value.estimate > 1000

    def test_no_duplicates_and_membership(self):
        rng = random.Random(11)
        for _ in range(60):
            m = rng.randint(1, 3)
            metric, r = random_metric_radius(rng, max_r=2)
            base = tuple(rng.randint(0, 4) for _ in range(m))
            sset = AccessibleStateSet(base, metric, r)
            states = list(accessible_states_enumerate(sset))
            assert len(states) == len(set(states))
            assert tuple(base) in states
            assert all(sset.contains(s) for s in states)

    def test_enumeration_matches_contains(self):
        # compare against a rectangle scan using the membership predicate
        rng = random.Random(12)
        for _ in range(40):
            m = rng.randint(1, 3)
            metric, r = random_metric_radius(rng, max_r=2)
            base = tuple(rng.randint(0, 3) for _ in range(m))
            sset = AccessibleStateSet(base, metric, r)
            hi = max(base) + 5
            expect = {
                s for s in itertools.product(range(hi), repeat=m) if sset.contains(s)
            }
            assert set(accessible_states_enumerate(sset)) == expect


class TestSBeatsExamples:
    def test_example1_b_beats_c(self):
        order = PreferenceOrder([2, 1, 0])  # c > b > a
        sset = AccessibleStateSet((45, 40, 14), Metric.L1, 10)
        assert s_beats(order, sset, 1, 2)

    def test_radius_zero_non_pivotal(self):
        order = PreferenceOrder([2, 1, 0])
        sset = AccessibleStateSet((45, 40, 14), Metric.L1, 0)
        assert not s_beats(order, sset, 1, 2)

    def test_same_action_never_beats(self):
        order = PreferenceOrder([0, 1, 2])
        sset = AccessibleStateSet((3, 3, 3), Metric.L1, 3)
        for c in range(3):
            assert not s_beats(order, sset, c, c)
            assert not s_dominates(order, sset, c, c)

    def test_dominance_antisymmetric_by_definition(self):
        rng = random.Random(5)
        for _ in range(100):
            m = rng.randint(2, 4)
            metric, r = random_metric_radius(rng)
            base = tuple(rng.randint(0, 5) for _ in range(m))
            sset = AccessibleStateSet(base, metric, r)
            order = random_order(rng, m)
            b, a = rng.sample(range(m), 2)
            if s_dominates(order, sset, b, a):
                assert not s_dominates(order, sset, a, b)


class TestOracleEquivalence:
    """Optimized s_beats / dominance / possible winners / response versus
    direct evaluation over the enumerated sets."""

    def _scenario(self, rng):
        m = rng.randint(2, 4)
        n = rng.randint(1, 10)
        metric, r = random_metric_radius(rng)
        ballots = random_ballots(rng, n, m)
        order = random_order(rng, m)
        i = rng.randrange(n)
        return ballots, order, i, VoterType(metric, r)

    def test_s_beats_matches_oracle(self):
        rng = random.Random(101)
        for _ in range(400):
            ballots, order, i, vt = self._scenario(rng)
            sset = accessible_set(ballots, i, vt.metric, vt.r)
            states = list(accessible_states_enumerate(sset))
            acts = list(range(ballots.m)) + [ABSTAIN]
            b, a = rng.sample(acts, 2)
            assert s_beats(order, sset, b, a) == brute_s_beats(order, states, b, a)

    def test_dominating_set_and_response_match_oracle(self):
        rng = random.Random(202)
        for _ in range(350):
            ballots, order, i, vt = self._scenario(rng)
            assert dominating_set(order, ballots, i, vt) == brute_dominating_set(order, ballots, i, vt)
            assert strategic_response(order, ballots, i, vt) == brute_response(order, ballots, i, vt)

    def test_possible_winners_match_oracle(self):
        rng = random.Random(303)
        for _ in range(350):
            ballots, order, i, vt = self._scenario(rng)
            sset = accessible_set(ballots, i, vt.metric, vt.r)
            assert possible_winners(ballots, i, vt.metric, vt.r) == brute_possible_winners(sset)


class TestDominanceRelationProperties:
    def test_transitive_and_antisymmetric_exhaustive(self):
        rng = random.Random(77)
        for _ in range(60):
            m = rng.randint(2, 3)
            metric, r = random_metric_radius(rng, max_r=2)
            base = tuple(rng.randint(0, 4) for _ in range(m))
            sset = AccessibleStateSet(base, metric, r)
            order = random_order(rng, m)
            states = list(accessible_states_enumerate(sset))
            dom = {
                (b, a)
                for b in range(m)
                for a in range(m)
                if b != a and brute_s_dominates(order, states, b, a)
            }
            for (b, a) in dom:
                assert (a, b) not in dom
                for (b2, a2) in dom:
                    if a == b2:
                        assert (b, a2) in dom

    def test_monotone_beats_in_radius(self):
        # if b dominates a at radius r, then b beats a at any larger radius
        rng = random.Random(88)
        for _ in range(150):
            m = rng.randint(2, 4)
            metric, r = random_metric_radius(rng, max_r=2)
            base = tuple(rng.randint(0, 5) for _ in range(m))
            order = random_order(rng, m)
            b, a = rng.sample(range(m), 2)
            sset = AccessibleStateSet(base, metric, r)
            if s_dominates(order, sset, b, a):
                for bump in (1, 2):
                    bigger = AccessibleStateSet(base, metric, r + bump)
                    assert s_beats(order, bigger, b, a)
