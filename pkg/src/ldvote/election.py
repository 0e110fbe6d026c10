"""Plurality election primitives: preferences, ballots, tallies, tie-breaking.

Candidates are the integers 0..m-1.  The fixed lexicographic priority used to
break score ties is ascending candidate index, so candidate 0 wins any tie it
is part of.  A ballot is either a candidate index or ABSTAIN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

ABSTAIN = -1


class PreferenceOrder:
    """A strict total order over candidates; ranking[0] is the favorite."""

    __slots__ = ("ranking", "_pos")

    def __init__(self, ranking: Iterable[int]):
        ranking = tuple(ranking)
        m = len(ranking)
        if sorted(ranking) != list(range(m)):
            raise ValueError(f"ranking must be a permutation of 0..{m - 1}: {ranking!r}")
        pos = [0] * m
        for p, c in enumerate(ranking):
            pos[c] = p
        self.ranking = ranking
        self._pos = tuple(pos)

    @property
    def m(self) -> int:
        return len(self.ranking)

    @property
    def top(self) -> int:
        return self.ranking[0]

    def rank(self, c: int) -> int:
        """1-based rank of candidate c (favorite has rank 1)."""
        return self._pos[c] + 1

    def pos(self, c: int) -> int:
        """0-based position of c; lower means more preferred."""
        return self._pos[c]

    def prefers(self, a: int, b: int) -> bool:
        return self._pos[a] < self._pos[b]

    def __eq__(self, other) -> bool:
        return isinstance(other, PreferenceOrder) and self.ranking == other.ranking

    def __hash__(self) -> int:
        return hash(self.ranking)

    def __repr__(self) -> str:
        return f"PreferenceOrder({list(self.ranking)})"


@dataclass(frozen=True)
class PreferenceProfile:
    """n preference orders over a common set of m candidates."""

    orders: tuple[PreferenceOrder, ...]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(self.orders))
        if not self.orders:
            raise ValueError("profile needs at least one voter")
        for o in self.orders:
            if o.m != self.m:
                raise ValueError(f"order over {o.m} candidates in an m={self.m} profile")

    @property
    def n(self) -> int:
        return len(self.orders)

    def truthful_ballots(self) -> "BallotProfile":
        return BallotProfile(tuple(o.top for o in self.orders), self.m)


@dataclass(frozen=True)
class BallotProfile:
    """The current vote of every voter: a candidate index or ABSTAIN."""

    votes: tuple[int, ...]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "votes", tuple(self.votes))
        for v in self.votes:
            if v != ABSTAIN and not (0 <= v < self.m):
                raise ValueError(f"vote {v} outside 0..{self.m - 1}")

    @property
    def n(self) -> int:
        return len(self.votes)

    def replace(self, i: int, action: int) -> "BallotProfile":
        votes = list(self.votes)
        votes[i] = action
        return BallotProfile(tuple(votes), self.m)


def tally(ballots: BallotProfile) -> tuple[int, ...]:
    """Per-candidate vote counts; abstentions contribute nothing."""
    counts = [0] * ballots.m
    for v in ballots.votes:
        if v != ABSTAIN:
            counts[v] += 1
    return tuple(counts)


def score_key(scores: Sequence[int], c: int) -> tuple[int, int]:
    """Sort key under which the larger candidate wins (count, then lower index)."""
    return (scores[c], -c)


def plurality_winner(scores: Sequence[int]) -> int:
    """The candidate with the highest count, ties broken toward lower index."""
    best = 0
    best_count = scores[0]
    for c in range(1, len(scores)):
        if scores[c] > best_count:
            best = c
            best_count = scores[c]
    return best


def with_vote(scores: Sequence[int], action: int) -> tuple[int, ...]:
    """Scores after one extra vote for `action`; ABSTAIN leaves them unchanged."""
    if action == ABSTAIN:
        return tuple(scores)
    out = list(scores)
    out[action] += 1
    return tuple(out)


def min_votes_to_win(scores: Sequence[int], c: int) -> int:
    """Smallest w >= 0 such that c wins after gaining w votes.

    Closed form: the deficit against the current winner, plus one when the
    winner has tie-break priority over c.
    """
    f = plurality_winner(scores)
    if f == c:
        return 0
    return scores[f] - scores[c] + (1 if f < c else 0)


def h_bar(scores: Sequence[int], w: int) -> frozenset[int]:
    """Candidates needing at most w additional votes to win."""
    if w < 0:
        raise ValueError("w must be nonnegative")
    return frozenset(c for c in range(len(scores)) if min_votes_to_win(scores, c) <= w)
