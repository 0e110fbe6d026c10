"""Local dominance under non-probabilistic uncertainty.

A voter looking at the tally (with her own vote removed) considers every score
vector within a given distance as possible.  Action b locally dominates action
a when b's outcome is strictly better in at least one possible state and never
worse.  The decision procedures here avoid enumerating states: each "is there
a state where y wins if I vote b while x wins if I vote a" question is reduced
to interval / budget feasibility of the critical (razor-thin) states, one
outcome pair at a time.  `accessible_states_enumerate` provides the brute-force
realization of the same sets, used as the test oracle.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .election import (
    ABSTAIN,
    BallotProfile,
    PreferenceOrder,
    h_bar,
    plurality_winner,
    tally,
)


class Metric(enum.Enum):
    L1 = "l1"
    LINF = "linf"
    MULT = "mult"
    EM = "em"


class Bias(enum.Enum):
    NONE = "none"
    TRUTH = "truth"
    LAZY = "lazy"


class StepType(enum.Enum):
    TYPE1 = 1  # compromise: move to a less preferred candidate
    TYPE2 = 2  # opportunity: move to a more preferred candidate
    BIAS = 3   # truth-bias / lazy-bias default move


class UnsupportedMetricError(ValueError):
    pass


class EnumerationBudgetError(RuntimeError):
    def __init__(self, estimate: int, budget: int):
        super().__init__(f"estimated {estimate} states exceeds enumeration budget {budget}")
        self.estimate = estimate
        self.budget = budget


def _check_radius(metric: Metric, value, name: str):
    if metric is Metric.MULT:
        value = Fraction(value)
        if value < 0:
            raise ValueError(f"{name} must be nonnegative")
        return value
    if value != int(value):
        raise ValueError(f"{name} must be an integer for {metric.value}")
    value = int(value)
    if value < 0:
        raise ValueError(f"{name} must be nonnegative")
    return value


@dataclass(frozen=True)
class VoterType:
    """Response-function parameters: distance metric, radius r, keep radius k, bias."""

    metric: Metric
    r: int | Fraction
    k: int | Fraction | None = None
    bias: Bias = Bias.NONE

    def __post_init__(self):
        object.__setattr__(self, "r", _check_radius(self.metric, self.r, "r"))
        if self.bias is Bias.NONE:
            if self.k is not None:
                raise ValueError("k is only meaningful for truth- or lazy-biased voters")
        else:
            if self.k is None:
                raise ValueError(f"{self.bias.value}-biased voters need a keep radius k")
            k = _check_radius(self.metric, self.k, "k")
            if k <= self.r:
                raise ValueError(f"k must exceed r (got k={k}, r={self.r})")
            object.__setattr__(self, "k", k)


@dataclass(frozen=True)
class AccessibleStateSet:
    """All score vectors within `radius` of `base` under `metric` (S_i sets)."""

    base: tuple[int, ...]
    metric: Metric
    radius: int | Fraction

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "radius", _check_radius(self.metric, self.radius, "radius"))

    def contains(self, scores: Sequence[int]) -> bool:
        if len(scores) != len(self.base) or any(s < 0 for s in scores):
            return False
        b = self.base
        if self.metric is Metric.L1:
            return sum(abs(s - t) for s, t in zip(scores, b)) <= self.radius
        if self.metric is Metric.LINF:
            return max(abs(s - t) for s, t in zip(scores, b)) <= self.radius
        if self.metric is Metric.MULT:
            factor = 1 + self.radius
            return all(s <= t * factor and t <= s * factor for s, t in zip(scores, b))
        # EM: same total, at most `radius` votes moved
        if sum(scores) != sum(b):
            return False
        return sum(max(0, s - t) for s, t in zip(scores, b)) <= self.radius


def base_scores(ballots: BallotProfile, i: int) -> tuple[int, ...]:
    """The tally with voter i's vote removed (s of a-without-i)."""
    counts = list(tally(ballots))
    v = ballots.votes[i]
    if v != ABSTAIN:
        counts[v] -= 1
    return tuple(counts)


def accessible_set(ballots: BallotProfile, i: int, metric: Metric, radius) -> AccessibleStateSet:
    return AccessibleStateSet(base_scores(ballots, i), metric, radius)


def _box_bounds(base: Sequence[int], metric: Metric, radius) -> tuple[list[int], list[int]]:
    """Per-candidate reachable count interval for the independent-coordinate metrics."""
    if metric is Metric.LINF:
        lo = [max(0, b - radius) for b in base]
        hi = [b + radius for b in base]
    else:  # MULT: zero-score candidates stay at zero
        factor = 1 + radius
        lo = [math.ceil(Fraction(b) / factor) for b in base]
        hi = [math.floor(b * factor) for b in base]
    return lo, hi


def _estimate_states(sset: AccessibleStateSet) -> int:
    base, metric, r = sset.base, sset.metric, sset.radius
    if metric in (Metric.LINF, Metric.MULT):
        lo, hi = _box_bounds(base, metric, r)
        est = 1
        for a, b in zip(lo, hi):
            est *= b - a + 1
        return est
    est = 1
    for b in base:
        est *= min(2 * r, b + r) + 1
    return est


def accessible_states_enumerate(sset: AccessibleStateSet, budget: int = 10_000_000) -> Iterator[tuple[int, ...]]:
    """Yield every score vector of the set exactly once (test oracle)."""
    est = _estimate_states(sset)
    if est > budget:
        raise EnumerationBudgetError(est, budget)
    base, metric, r = sset.base, sset.metric, sset.radius
    m = len(base)
    if metric in (Metric.LINF, Metric.MULT):
        lo, hi = _box_bounds(base, metric, r)
        yield from itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))
        return
    if metric is Metric.L1:
        def rec_l1(j: int, left: int, prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
            if j == m:
                yield prefix
                return
            for v in range(max(0, base[j] - left), base[j] + left + 1):
                yield from rec_l1(j + 1, left - abs(v - base[j]), prefix + (v,))

        yield from rec_l1(0, r, ())
        return

    def rec_em(j: int, inc: int, dec: int, prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if j == m:
            if inc == dec:
                yield prefix
            return
        for v in range(max(0, base[j] - (r - dec)), base[j] + (r - inc) + 1):
            d = v - base[j]
            yield from rec_em(j + 1, inc + max(0, d), dec + max(0, -d), prefix + (v,))

    yield from rec_em(0, 0, 0, ())


def threshold_beta(metric: Metric, r, winner_score: int) -> int:
    """Minimum tally score that keeps a candidate a possible winner (Lemma-style closed forms)."""
    if metric is Metric.L1:
        return winner_score - r - 1
    if metric is Metric.LINF:
        return winner_score - 2 * r - 1
    if metric is Metric.MULT:
        factor = 1 + Fraction(r)
        return math.ceil(Fraction(math.ceil(Fraction(winner_score) / factor)) / factor) - 1
    raise UnsupportedMetricError("no winner-score-only threshold for the earth-mover metric")


def _tie(u: int, v: int) -> int:
    """Extra votes u needs over v's count to beat v (0 when u has tie-break priority)."""
    return 0 if u < v else 1


def _em_wins(scores: Sequence[int], c: int) -> bool:
    sc = scores[c] + 1
    return all(sc >= scores[d] + _tie(c, d) for d in range(len(scores)) if d != c)


def possible_winners_scores(scores: Sequence[int], metric: Metric, r) -> frozenset[int]:
    """Candidates that win in some state at distance <= r from `scores`, once given one extra vote."""
    m = len(scores)
    if metric is Metric.L1:
        return h_bar(scores, r + 1)
    if metric is Metric.LINF:
        return h_bar(scores, 2 * r + 1)
    if metric is Metric.MULT:
        lo, hi = _box_bounds(scores, metric, r)
        return frozenset(
            c for c in range(m)
            if all(hi[c] + 1 >= lo[d] + _tie(c, d) for d in range(m) if d != c)
        )
    # EM: transfer votes to c from its strongest remaining opponent
    out = set()
    for c in range(m):
        cur = list(scores)
        moved = 0
        while True:
            if _em_wins(cur, c):
                out.add(c)
                break
            if moved >= r:
                break
            d = max(
                (d for d in range(m) if d != c and cur[d] > 0),
                key=lambda d: (cur[d], -d),
                default=None,
            )
            if d is None:
                break
            cur[d] -= 1
            cur[c] += 1
            moved += 1
    return frozenset(out)


def possible_winners(ballots: BallotProfile, i: int, metric: Metric, r) -> frozenset[int]:
    """W_i: the candidates voter i considers able to win, given her uncertainty."""
    return possible_winners_scores(base_scores(ballots, i), metric, r)


# ---------------------------------------------------------------------------
# Exact S-beats decision via critical states.
#
# f(s'+b) = y together with f(s'+a) = x pins the relationship between
# p = s'(y) and q = s'(x) to at most two values of p - q, and gives every
# other candidate a cap of the form p + gamma.  Feasibility of such a state
# within the metric ball is then interval arithmetic (box metrics) or a
# small convex / budget check (L1, EM).
# ---------------------------------------------------------------------------


def _joint_feasible(base, metric, radius, box, b, a, y, x) -> bool:
    m = len(base)
    t_yx = _tie(y, x)
    if b == y and a == x:
        deltas = (t_yx - 1, t_yx)
    elif b == y:
        deltas = (t_yx - 1,)
    elif a == x:
        deltas = (t_yx,)
    else:
        return False

    others = [d for d in range(m) if d != y and d != x]
    for delta in deltas:
        gammas = []
        for d in others:
            if b == y:
                u = 1 - _tie(y, d)
            else:
                u = -_tie(y, d) - (1 if d == b else 0)
            if a == x:
                v = 1 - _tie(x, d)
            else:
                v = -_tie(x, d) - (1 if d == a else 0)
            gammas.append(min(u, v - delta))

        if metric in (Metric.LINF, Metric.MULT):
            lo, hi = box
            p_lo = max(lo[y], lo[x] + delta)
            p_hi = min(hi[y], hi[x] + delta)
            for d, g in zip(others, gammas):
                p_lo = max(p_lo, lo[d] - g)
            if p_lo <= p_hi:
                return True
        elif metric is Metric.L1:
            p_min = max(0, delta, max((-g for g in gammas), default=0))
            points = {base[y], base[x] + delta, p_min}
            points.update(base[d] - g for d, g in zip(others, gammas))
            for p in points:
                if p < p_min:
                    continue
                cost = abs(p - base[y]) + abs(p - delta - base[x])
                for d, g in zip(others, gammas):
                    cost += max(0, base[d] - (p + g))
                if cost <= radius:
                    return True
        else:  # EM
            total = sum(base)
            p_lo = max(0, delta, base[y] - radius, base[x] - radius + delta)
            p_hi = min(base[y] + radius, base[x] + radius + delta)
            for p in range(p_lo, p_hi + 1):
                q = p - delta
                caps = [p + g for g in gammas]
                if any(c < 0 for c in caps):
                    continue
                t_rest = total - p - q
                if t_rest < 0 or t_rest > sum(caps):
                    continue
                free = sum(min(bd, c) for bd, c in zip((base[d] for d in others), caps))
                extra = max(0, t_rest - free)
                inc = max(0, p - base[y]) + max(0, q - base[x]) + extra
                if inc <= radius:
                    return True
    return False


def s_beats(order: PreferenceOrder, sset: AccessibleStateSet, b: int, a: int) -> bool:
    """True iff some accessible state makes voting b strictly better than voting a."""
    if b == a:
        return False
    base, metric, radius = sset.base, sset.metric, sset.radius
    m = len(base)
    box = _box_bounds(base, metric, radius) if metric in (Metric.LINF, Metric.MULT) else None
    if b != ABSTAIN:
        for x in range(m):
            if x != b and order.prefers(b, x):
                if _joint_feasible(base, metric, radius, box, b, a, b, x):
                    return True
    if a != ABSTAIN:
        for y in range(m):
            if y != a and y != b and order.prefers(y, a):
                if _joint_feasible(base, metric, radius, box, b, a, y, a):
                    return True
    return False


def s_dominates(order: PreferenceOrder, sset: AccessibleStateSet, b: int, a: int) -> bool:
    """b S-dominates a: b beats a somewhere and a beats b nowhere."""
    return s_beats(order, sset, b, a) and not s_beats(order, sset, a, b)


def dominating_set(order: PreferenceOrder, ballots: BallotProfile, i: int, vt: VoterType) -> frozenset[int]:
    """All candidates that locally dominate voter i's current action."""
    sset = accessible_set(ballots, i, vt.metric, vt.r)
    a_i = ballots.votes[i]
    return frozenset(
        c for c in range(ballots.m) if c != a_i and s_dominates(order, sset, c, a_i)
    )


def _response_at(order: PreferenceOrder, ballots: BallotProfile, i: int,
                 metric: Metric, r, scores: Sequence[int] | None = None) -> Optional[int]:
    """Most preferred dominating candidate, or None.

    Fast paths: when the current vote is not a possible winner, only the
    favorite possible winner can be the response; when it is the favorite
    possible winner, nothing dominates it.  Both are pinned to the
    enumeration oracle by tests.
    """
    a_i = ballots.votes[i]
    if scores is None:
        base = base_scores(ballots, i)
    else:
        counts = list(scores)
        if a_i != ABSTAIN:
            counts[a_i] -= 1
        base = tuple(counts)
    winners = possible_winners_scores(base, metric, r)
    best = min(winners, key=order.pos)
    if a_i != ABSTAIN and a_i in winners:
        if a_i == best:
            return None
        sset = AccessibleStateSet(base, metric, r)
        for c in order.ranking:
            if c != a_i and s_dominates(order, sset, c, a_i):
                return c
        return None
    sset = AccessibleStateSet(base, metric, r)
    if s_dominates(order, sset, best, a_i):
        return best
    return None


def strategic_response(order: PreferenceOrder, ballots: BallotProfile, i: int,
                       vt: VoterType) -> Optional[int]:
    """Def.-3 response of a bias-free voter: favorite member of the dominating set."""
    if vt.bias is not Bias.NONE:
        raise ValueError("strategic_response is for bias-free voters")
    return _response_at(order, ballots, i, vt.metric, vt.r)


def biased_response(order: PreferenceOrder, ballots: BallotProfile, i: int,
                    vt: VoterType) -> Optional[int]:
    """Truth- or lazy-biased response: strategic move, else keep if the current
    vote still beats the default somewhere within radius k, else the default."""
    if vt.bias is Bias.NONE:
        raise ValueError("biased_response needs a truth- or lazy-biased voter type")
    move = _response_at(order, ballots, i, vt.metric, vt.r)
    if move is not None:
        return move
    a_i = ballots.votes[i]
    default = order.top if vt.bias is Bias.TRUTH else ABSTAIN
    if a_i == default:
        return None
    ssetk = accessible_set(ballots, i, vt.metric, vt.k)
    if s_beats(order, ssetk, a_i, default):
        return None
    return default


def voter_response(order: PreferenceOrder, ballots: BallotProfile, i: int,
                   vt: VoterType) -> Optional[int]:
    """Dispatch on bias kind."""
    if vt.bias is Bias.NONE:
        return _response_at(order, ballots, i, vt.metric, vt.r)
    return biased_response(order, ballots, i, vt)


def classify_step(order: PreferenceOrder, frm: int, to: int) -> StepType:
    """Compromise (type 1) vs opportunity (type 2); abstention enters as type 2, leaves as type 1."""
    if frm == to:
        raise ValueError("a step must change the action")
    if frm == ABSTAIN:
        return StepType.TYPE2
    if to == ABSTAIN:
        return StepType.TYPE1
    return StepType.TYPE2 if order.prefers(to, frm) else StepType.TYPE1
