import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldvote import (
    ABSTAIN,
    BallotProfile,
    PreferenceOrder,
    PreferenceProfile,
    h_bar,
    min_votes_to_win,
    plurality_winner,
    score_key,
    tally,
    with_vote,
)
from tests.oracles import brute_min_votes_to_win

EXAMPLE1_SCORES = (45, 40, 15)


def example1_ballots() -> BallotProfile:
    votes = [0] * 45 + [1] * 40 + [2] * 15
    return BallotProfile(tuple(votes), 3)


scores_st = st.lists(st.integers(0, 50), min_size=1, max_size=6).map(tuple)


class TestPreferenceOrder:
    def test_rank_and_top(self):
        order = PreferenceOrder([2, 0, 1])
        assert order.top == 2
        assert order.rank(2) == 1
        assert order.rank(0) == 2
        assert order.rank(1) == 3
        assert order.prefers(2, 1) and not order.prefers(1, 2)

    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            PreferenceOrder([0, 0, 1])
        with pytest.raises(ValueError):
            PreferenceOrder([1, 2, 3])

    def test_strict_total_order(self):
        order = PreferenceOrder([3, 1, 0, 2])
        for a in range(4):
            assert not order.prefers(a, a)
            for b in range(4):
                if a != b:
                    assert order.prefers(a, b) != order.prefers(b, a)


class TestTally:
    def test_example1(self):
        assert tally(example1_ballots()) == (45, 40, 15)

    def test_all_abstain(self):
        assert tally(BallotProfile((ABSTAIN,) * 4, 3)) == (0, 0, 0)

    def test_abstention_ignored(self):
        assert tally(BallotProfile((0, 0, ABSTAIN), 3)) == (2, 0, 0)


class TestPluralityWinner:
    def test_example1(self):
        assert plurality_winner(EXAMPLE1_SCORES) == 0

    def test_lexicographic_tie(self):
        assert plurality_winner((3, 3, 1)) == 0

    def test_all_zero(self):
        assert plurality_winner((0, 0, 0)) == 0

    @given(scores_st)
    def test_winner_is_score_key_max(self, scores):
        w = plurality_winner(scores)
        assert all(score_key(scores, w) >= score_key(scores, c) for c in range(len(scores)))

    def test_invariant_under_voter_permutation(self):
        rng = random.Random(0)
        for _ in range(50):
            n, m = rng.randint(1, 10), rng.randint(1, 4)
            votes = [rng.choice(list(range(m)) + [ABSTAIN]) for _ in range(n)]
            shuffled = votes[:]
            rng.shuffle(shuffled)
            w1 = plurality_winner(tally(BallotProfile(tuple(votes), m)))
            w2 = plurality_winner(tally(BallotProfile(tuple(shuffled), m)))
            assert w1 == w2


class TestWithVote:
    def test_increment(self):
        assert with_vote((2, 2, 0), 1) == (2, 3, 0)

    def test_abstain_noop(self):
        assert with_vote(EXAMPLE1_SCORES, ABSTAIN) == EXAMPLE1_SCORES

    def test_composition_with_winner(self):
        assert plurality_winner(with_vote((0, 0), 0)) == 0


class TestMinVotesToWin:
    def test_example1_values(self):
        # frozen from the brute-force increment oracle (tie-break exact):
        # b ties at +5 and loses lexicographically, so it needs 6
        assert [brute_min_votes_to_win(EXAMPLE1_SCORES, c) for c in range(3)] == [0, 6, 31]
        assert [min_votes_to_win(EXAMPLE1_SCORES, c) for c in range(3)] == [0, 6, 31]

    def test_tied_loser_needs_one(self):
        assert min_votes_to_win((3, 3, 1), 1) == 1

    def test_current_winner_needs_zero(self):
        assert min_votes_to_win((45, 40, 15), 0) == 0

    @given(scores_st)
    def test_matches_increment_oracle(self, scores):
        for c in range(len(scores)):
            assert min_votes_to_win(scores, c) == brute_min_votes_to_win(scores, c)


class TestHBar:
    def test_example1_w11(self):
        assert h_bar(EXAMPLE1_SCORES, 11) == {0, 1}

    def test_w0_is_winner_only(self):
        rng = random.Random(3)
        for _ in range(40):
            scores = tuple(rng.randint(0, 9) for _ in range(rng.randint(1, 5)))
            assert h_bar(scores, 0) == {plurality_winner(scores)}

    def test_tie_pair(self):
        assert h_bar((3, 3, 1), 1) == {0, 1}

    @given(scores_st, st.integers(0, 20), st.integers(0, 20))
    def test_monotone_in_w(self, scores, w1, w2):
        lo, hi = min(w1, w2), max(w1, w2)
        assert h_bar(scores, lo) <= h_bar(scores, hi)

    def test_rejects_negative_w(self):
        with pytest.raises(ValueError):
            h_bar((1, 2), -1)


class TestScoreOrder:
    @given(scores_st)
    @settings(max_examples=50)
    def test_strict_total_order(self, scores):
        m = len(scores)
        keys = [score_key(scores, c) for c in range(m)]
        # total and antisymmetric
        for a in range(m):
            for b in range(m):
                if a != b:
                    assert (keys[a] > keys[b]) != (keys[b] > keys[a])
        # transitive
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    if keys[a] > keys[b] and keys[b] > keys[c]:
                        assert keys[a] > keys[c]


class TestProfiles:
    def test_truthful_ballots(self):
        profile = PreferenceProfile(
            (PreferenceOrder([1, 0, 2]), PreferenceOrder([2, 1, 0])), 3)
        assert profile.truthful_ballots().votes == (1, 2)

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            PreferenceProfile((PreferenceOrder([0, 1]),), 3)

    def test_ballot_range_checked(self):
        with pytest.raises(ValueError):
            BallotProfile((0, 3), 3)
        with pytest.raises(ValueError):
            BallotProfile((-2,), 3)
