"""Truthful-profile comparison rules and aggregation of run traces into the
observed variables (one ResultRow per preference profile).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .election import BallotProfile, PreferenceProfile, plurality_winner, tally
from .dynamics import Trace
from .prefgen import GroundTruth


def borda_scores(profile: PreferenceProfile) -> list[int]:
    scores = [0] * profile.m
    for order in profile.orders:
        for c in range(profile.m):
            scores[c] += profile.m - order.rank(c)
    return scores


def _argmax(scores: Sequence) -> int:
    return max(range(len(scores)), key=lambda c: (scores[c], -c))


def borda_winner(profile: PreferenceProfile) -> int:
    return _argmax(borda_scores(profile))


def pairwise_support(profile: PreferenceProfile) -> list[list[int]]:
    """support[c][d] = number of voters preferring c over d."""
    m = profile.m
    sup = [[0] * m for _ in range(m)]
    for order in profile.orders:
        for c in range(m):
            for d in range(m):
                if c != d and order.prefers(c, d):
                    sup[c][d] += 1
    return sup


def copeland_winner(profile: PreferenceProfile) -> int:
    sup = pairwise_support(profile)
    m = profile.m
    scores = [0] * m
    for c in range(m):
        for d in range(m):
            if c == d:
                continue
            if sup[c][d] > sup[d][c]:
                scores[c] += 1
            elif sup[c][d] < sup[d][c]:
                scores[c] -= 1
    return _argmax(scores)


def maximin_winner(profile: PreferenceProfile) -> int:
    sup = pairwise_support(profile)
    m = profile.m
    if m == 1:
        return 0
    scores = [min(sup[c][d] for d in range(m) if d != c) for c in range(m)]
    return _argmax(scores)


def condorcet_winner(profile: PreferenceProfile) -> Optional[int]:
    """The candidate beating every rival by strict majority, if any (ties defeat)."""
    sup = pairwise_support(profile)
    m = profile.m
    for c in range(m):
        if all(sup[c][d] > sup[d][c] for d in range(m) if d != c):
            return c
    return None


def social_welfare_rank(profile: PreferenceProfile, winner: int) -> float:
    """Winner's Borda shortfall relative to the maximum possible spread n*(m-1);
    0 is best."""
    scores = borda_scores(profile)
    denom = profile.n * (profile.m - 1)
    if denom == 0:
        return 0.0
    return (max(scores) - scores[winner]) / denom


@dataclass(frozen=True)
class ResultRow:
    """Observed variables for one preference profile, averaged over repetitions."""

    NumStep: float
    NumStates: int
    NumWinners: int
    WinnerConsistency: float
    PluralityAgreement: float
    BordaAgreement: float
    CoplandAgreement: float
    MaximinAgreement: float
    CondorcetAgreement: Optional[float]
    SocialWelfare: float
    Gap1_2: Optional[float]
    Gap2_3: Optional[float]
    TotalDuverger: float
    RelativeDuverger: float
    WinnerGroundRank: Optional[float]


def _finite_mean(values: list[Optional[float]]) -> Optional[float]:
    finite = [v for v in values if v is not None]
    if not finite:
        return None
    return sum(finite) / len(finite)


def aggregate(profile: PreferenceProfile, traces: Sequence[Trace],
              ground: Optional[GroundTruth] = None) -> ResultRow:
    """Reduce the repeated runs of one profile to the observed variables."""
    if not traces:
        raise ValueError("aggregate needs at least one trace")
    n, m = profile.n, profile.m
    reps = len(traces)

    w_plur = plurality_winner(tally(profile.truthful_ballots()))
    w_borda = borda_winner(profile)
    w_cope = copeland_winner(profile)
    w_maximin = maximin_winner(profile)
    w_cond = condorcet_winner(profile)

    finals = [tr.final for tr in traces]
    final_scores = [tally(f) for f in finals]
    winners = [plurality_winner(s) for s in final_scores]

    counts = Counter(winners)
    gap12: list[Optional[float]] = []
    gap23: list[Optional[float]] = []
    total_duv = 0
    rel_duv = 0.0
    for s in final_scores:
        ranked = sorted(range(m), key=lambda c: (s[c], -c), reverse=True)
        s1 = s[ranked[0]]
        s2 = s[ranked[1]] if m >= 2 else 0
        s3 = s[ranked[2]] if m >= 3 else 0
        gap12.append(s1 / s2 if s2 > 0 else None)
        gap23.append((s2 / s3 if s3 > 0 else None) if m >= 3 else None)
        if s3 == 0:
            total_duv += 1
        rel_duv += (s1 + s2) / n

    return ResultRow(
        NumStep=sum(tr.num_moves for tr in traces) / reps,
        NumStates=len({f.votes for f in finals}),
        NumWinners=len(counts),
        WinnerConsistency=max(counts.values()) / reps,
        PluralityAgreement=sum(w == w_plur for w in winners) / reps,
        BordaAgreement=sum(w == w_borda for w in winners) / reps,
        CoplandAgreement=sum(w == w_cope for w in winners) / reps,
        MaximinAgreement=sum(w == w_maximin for w in winners) / reps,
        CondorcetAgreement=None if w_cond is None else sum(w == w_cond for w in winners) / reps,
        SocialWelfare=sum(social_welfare_rank(profile, w) for w in winners) / reps,
        Gap1_2=_finite_mean(gap12),
        Gap2_3=_finite_mean(gap23),
        TotalDuverger=total_duv / reps,
        RelativeDuverger=rel_duv / reps,
        WinnerGroundRank=None if ground is None else sum(ground.rank_of(w) for w in winners) / reps,
    )
