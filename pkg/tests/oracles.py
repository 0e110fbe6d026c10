"""Brute-force reference implementations.

Everything here works by exhaustive enumeration and stays deliberately
independent of the optimized decision procedures it is used to check.
"""

from __future__ import annotations

import random
from fractions import Fraction

from ldvote import (
    ABSTAIN,
    AccessibleStateSet,
    BallotProfile,
    Metric,
    PreferenceOrder,
    VoterType,
    accessible_set,
    accessible_states_enumerate,
    plurality_winner,
    with_vote,
)


def brute_min_votes_to_win(scores, c, limit=None) -> int:
    limit = limit if limit is not None else sum(scores) + 2
    cur = list(scores)
    for w in range(limit + 1):
        if plurality_winner(cur) == c:
            return w
        cur[c] += 1
    raise AssertionError("no winning count found within limit")


def brute_s_beats(order: PreferenceOrder, states, b: int, a: int) -> bool:
    for s in states:
        wb = plurality_winner(with_vote(s, b))
        wa = plurality_winner(with_vote(s, a))
        if wb != wa and order.prefers(wb, wa):
            return True
    return False


def brute_s_dominates(order: PreferenceOrder, states, b: int, a: int) -> bool:
    return brute_s_beats(order, states, b, a) and not brute_s_beats(order, states, a, b)


def brute_possible_winners(sset: AccessibleStateSet) -> frozenset[int]:
    m = len(sset.base)
    out = set()
    for s in accessible_states_enumerate(sset):
        for c in range(m):
            if c not in out and plurality_winner(with_vote(s, c)) == c:
                out.add(c)
    return frozenset(out)


def brute_dominating_set(order: PreferenceOrder, ballots: BallotProfile, i: int,
                         vt: VoterType) -> frozenset[int]:
    sset = accessible_set(ballots, i, vt.metric, vt.r)
    states = list(accessible_states_enumerate(sset))
    a_i = ballots.votes[i]
    return frozenset(
        c for c in range(ballots.m)
        if c != a_i and brute_s_dominates(order, states, c, a_i)
    )


def brute_response(order: PreferenceOrder, ballots: BallotProfile, i: int,
                   vt: VoterType):
    dom = brute_dominating_set(order, ballots, i, vt)
    return min(dom, key=order.pos) if dom else None


def random_order(rng: random.Random, m: int) -> PreferenceOrder:
    perm = list(range(m))
    rng.shuffle(perm)
    return PreferenceOrder(perm)


def random_metric_radius(rng: random.Random, max_r: int = 3):
    metric = rng.choice(list(Metric))
    if metric is Metric.MULT:
        r = rng.choice([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)])
    else:
        r = rng.randint(0, max_r)
    return metric, r


def random_ballots(rng: random.Random, n: int, m: int, allow_abstain: bool = True) -> BallotProfile:
    actions = list(range(m)) + ([ABSTAIN] if allow_abstain else [])
    return BallotProfile(tuple(rng.choice(actions) for _ in range(n)), m)
