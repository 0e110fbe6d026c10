"""The iterative voting loop: schedulers, step execution, equilibrium detection,
and post-hoc auditing of the convergence invariants.

One run is strictly sequential and deterministic given (inputs, seed).  Group
ticks apply every selected voter's move simultaneously against the pre-tick
state, so moves can collide; that is intended.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .election import (
    ABSTAIN,
    BallotProfile,
    PreferenceProfile,
    h_bar,
    plurality_winner,
    tally,
)
from .dominance import (
    AccessibleStateSet,
    Bias,
    Metric,
    StepType,
    VoterType,
    accessible_set,
    base_scores,
    classify_step,
    possible_winners,
    possible_winners_scores,
    s_beats,
    _response_at,
)


@dataclass(frozen=True)
class StepRecord:
    time: int
    voter: int
    action_from: int
    action_to: int
    step_type: StepType
    scores_before: tuple[int, ...]
    scores_after: tuple[int, ...]


@dataclass(frozen=True)
class Trace:
    initial: BallotProfile
    steps: tuple[StepRecord, ...]
    final: BallotProfile
    converged: bool

    @property
    def num_moves(self) -> int:
        return len(self.steps)

    @property
    def num_ticks(self) -> int:
        return self.steps[-1].time + 1 if self.steps else 0


class SchedulerKind(enum.Enum):
    SINGLETON = "singleton"
    GROUP = "group"


@dataclass(frozen=True)
class Scheduler:
    """Selects which pending movers act on a tick.

    SINGLETON picks one mover uniformly.  GROUP picks a uniform nonempty subset
    of size <= group_cap (default n//2); with probability p_singleton the tick
    degenerates to a single mover, so every voter eventually plays alone.  With
    opportunity_priority, the pool is restricted to type-2 movers whenever any
    exist.
    """

    kind: SchedulerKind = SchedulerKind.SINGLETON
    group_cap: Optional[int] = None
    opportunity_priority: bool = False
    p_singleton: float = 0.2

    def select(self, rng: random.Random, movers: list[int], type2: set[int], n: int) -> list[int]:
        if self.kind is SchedulerKind.SINGLETON:
            return [movers[rng.randrange(len(movers))]]
        pool = movers
        if self.opportunity_priority:
            t2 = [i for i in movers if i in type2]
            if t2:
                pool = t2
        if self.p_singleton > 0 and rng.random() < self.p_singleton:
            return [pool[rng.randrange(len(pool))]]
        cap = self.group_cap if self.group_cap is not None else max(1, n // 2)
        size = rng.randint(1, min(cap, len(pool)))
        return sorted(rng.sample(pool, size))


def _as_types(n: int, voter_types) -> list[VoterType]:
    if isinstance(voter_types, VoterType):
        return [voter_types] * n
    vts = list(voter_types)
    if len(vts) != n:
        raise ValueError(f"{len(vts)} voter types for {n} voters")
    return vts


def _response_with_kind(order, ballots, i, vt, scores) -> Optional[tuple[int, bool]]:
    """(move, is_bias_move) for voter i, or None.  Matches strategic_response /
    biased_response exactly; shared so the runner can tag step types."""
    move = _response_at(order, ballots, i, vt.metric, vt.r, scores)
    if move is not None:
        return (move, False)
    if vt.bias is Bias.NONE:
        return None
    a_i = ballots.votes[i]
    default = order.top if vt.bias is Bias.TRUTH else ABSTAIN
    if a_i == default:
        return None
    ssetk = accessible_set(ballots, i, vt.metric, vt.k)
    if s_beats(order, ssetk, a_i, default):
        return None
    return (default, True)


def _pending(profile: PreferenceProfile, ballots: BallotProfile,
             vts: Sequence[VoterType], scores=None) -> dict[int, tuple[int, bool]]:
    if scores is None:
        scores = tally(ballots)
    cache: dict = {}
    out: dict[int, tuple[int, bool]] = {}
    for i, order in enumerate(profile.orders):
        key = (order, ballots.votes[i], vts[i])
        if key in cache:
            res = cache[key]
        else:
            res = _response_with_kind(order, ballots, i, vts[i], scores)
            cache[key] = res
        if res is not None:
            out[i] = res
    return out


def pending_moves(profile: PreferenceProfile, ballots: BallotProfile,
                  voter_types) -> dict[int, int]:
    """Every voter's response against the current state, where one exists."""
    vts = _as_types(profile.n, voter_types)
    return {i: to for i, (to, _) in _pending(profile, ballots, vts).items()}


def is_equilibrium(profile: PreferenceProfile, ballots: BallotProfile, voter_types) -> bool:
    vts = _as_types(profile.n, voter_types)
    return not _pending(profile, ballots, vts)


def run_to_equilibrium(profile: PreferenceProfile, voter_types,
                       initial: Optional[BallotProfile] = None,
                       scheduler: Scheduler = Scheduler(),
                       seed: int = 0,
                       max_steps: Optional[int] = None) -> Trace:
    """Iterate responses until no voter has a pending move or max_steps ticks pass."""
    n, m = profile.n, profile.m
    vts = _as_types(n, voter_types)
    if initial is None:
        initial = profile.truthful_ballots()
    if max_steps is None:
        max_steps = 10 * n * m
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    rng = random.Random(seed)

    ballots = initial
    scores = list(tally(initial))
    steps: list[StepRecord] = []
    tick = 0
    converged = False
    while True:
        pend = _pending(profile, ballots, vts, tuple(scores))
        if not pend:
            converged = True
            break
        if tick >= max_steps:
            break
        movers = sorted(pend)
        type2 = {
            i for i in movers
            if not pend[i][1] and classify_step(profile.orders[i], ballots.votes[i], pend[i][0]) is StepType.TYPE2
        }
        chosen = scheduler.select(rng, movers, type2, n)
        before = tuple(scores)
        votes = list(ballots.votes)
        moved = []
        for i in chosen:
            to, is_bias = pend[i]
            frm = votes[i]
            stype = StepType.BIAS if is_bias else classify_step(profile.orders[i], frm, to)
            votes[i] = to
            if frm != ABSTAIN:
                scores[frm] -= 1
            if to != ABSTAIN:
                scores[to] += 1
            moved.append((i, frm, to, stype))
        ballots = BallotProfile(tuple(votes), m)
        after = tuple(scores)
        for i, frm, to, stype in moved:
            steps.append(StepRecord(tick, i, frm, to, stype, before, after))
        tick += 1
    return Trace(initial, tuple(steps), ballots, converged)


def replay(trace: Trace) -> BallotProfile:
    """Apply the recorded steps to the initial ballots."""
    votes = list(trace.initial.votes)
    for s in trace.steps:
        votes[s.voter] = s.action_to
    return BallotProfile(tuple(votes), trace.initial.m)


def states_by_tick(trace: Trace) -> list[BallotProfile]:
    """Ballot states s^0 .. s^T, one entry per tick boundary."""
    out = [trace.initial]
    votes = list(trace.initial.votes)
    cur_tick = None
    for s in trace.steps:
        if cur_tick is not None and s.time != cur_tick:
            out.append(BallotProfile(tuple(votes), trace.initial.m))
        cur_tick = s.time
        votes[s.voter] = s.action_to
    if cur_tick is not None:
        out.append(BallotProfile(tuple(votes), trace.initial.m))
    return out


@dataclass(frozen=True)
class Violation:
    kind: str
    time: Optional[int]
    detail: str


def verify_trace_invariants(profile: PreferenceProfile, trace: Trace,
                            metric: Metric, r) -> list[Violation]:
    """Audit a homogeneous bias-free run against the truthful-start convergence
    invariants: deserted candidates drop out of the leader set, every move is a
    compromise, the winner's score never decreases, the leader set only
    shrinks; plus the two-leaders property and the final-state structure.
    The leader set is the score-threshold possible-winner set of the metric
    (h_bar at r+1 for the additive metric)."""
    violations: list[Violation] = []

    if replay(trace).votes != trace.final.votes:
        violations.append(Violation("replay-mismatch", None, "steps do not reproduce the final ballots"))

    lead = lambda scores: possible_winners_scores(scores, metric, r)

    for s in trace.steps:
        if s.step_type is not StepType.TYPE1:
            violations.append(Violation(
                "non-compromise", s.time,
                f"voter {s.voter} moved {s.action_from}->{s.action_to} ({s.step_type.name})"))
        if max(s.scores_after) < max(s.scores_before):
            violations.append(Violation(
                "winner-score-decreased", s.time,
                f"{max(s.scores_before)} -> {max(s.scores_after)}"))
        before_set = lead(s.scores_before)
        after_set = lead(s.scores_after)
        if s.action_from != ABSTAIN and s.action_from in after_set:
            violations.append(Violation(
                "deserted-still-possible", s.time,
                f"candidate {s.action_from} deserted by voter {s.voter} still a possible winner"))
        if not after_set <= before_set:
            violations.append(Violation(
                "possible-winners-expanded", s.time,
                f"{sorted(before_set)} -> {sorted(after_set)}"))

    if trace.steps:
        for t, ballots in enumerate(states_by_tick(trace)):
            if len(lead(tally(ballots))) <= 1:
                violations.append(Violation(
                    "single-leader-mid-run", t, "only one possible winner while moves occurred"))

    if trace.converged:
        final_scores = tally(trace.final)
        one_leader_tight = False
        if metric is Metric.L1:
            one_leader_tight = len(h_bar(final_scores, r)) == 1
        elif metric is Metric.LINF:
            one_leader_tight = len(h_bar(final_scores, 2 * r)) == 1
        if not one_leader_tight:
            for i in range(profile.n):
                a_i = trace.final.votes[i]
                if a_i == ABSTAIN or a_i not in possible_winners(trace.final, i, metric, r):
                    violations.append(Violation(
                        "final-state-structure", None,
                        f"voter {i} votes {a_i}, not a possible winner, with >1 tight leader"))
    return violations


def chunk_potential(ballots: BallotProfile, r: int) -> int:
    """-n * |leaders| + #votes on leaders, with leaders = h_bar at r+1."""
    scores = tally(ballots)
    hb = h_bar(scores, r + 1)
    on = sum(1 for v in ballots.votes if v in hb)
    return -ballots.n * len(hb) + on


def chunk_boundary_potentials(trace: Trace, r: int) -> list[int]:
    """Chunk potential at the start of every compromise chunk and at the final
    state.  A chunk is a compromise (all-type-1) tick plus the opportunity
    ticks that follow it."""
    states = states_by_tick(trace)
    ticks: dict[int, list[StepRecord]] = {}
    for s in trace.steps:
        ticks.setdefault(s.time, []).append(s)
    boundaries = []
    for idx, t in enumerate(sorted(ticks)):
        if all(rec.step_type is StepType.TYPE1 for rec in ticks[t]):
            boundaries.append(chunk_potential(states[idx], r))
    boundaries.append(chunk_potential(states[-1], r))
    return boundaries


def check_equilibrium_properties(profile: PreferenceProfile, ballots: BallotProfile,
                                 voter_types) -> list[Violation]:
    """Structural checks on an equilibrium: voters are at their bias default or
    within reach of the winner (radius k), and nobody votes for their
    least-preferred possible winner."""
    vts = _as_types(profile.n, voter_types)
    if _pending(profile, ballots, vts):
        raise ValueError("state is not an equilibrium")
    scores = tally(ballots)
    violations: list[Violation] = []
    for i, order in enumerate(profile.orders):
        vt = vts[i]
        a_i = ballots.votes[i]
        if vt.bias is not Bias.NONE:
            default = order.top if vt.bias is Bias.TRUTH else ABSTAIN
            if a_i != default:
                if vt.metric is Metric.MULT:
                    reach = possible_winners_scores(scores, vt.metric, vt.k)
                else:
                    reach = h_bar(scores, vt.k)
                if a_i == ABSTAIN or a_i not in reach:
                    violations.append(Violation(
                        "outside-keep-radius", None,
                        f"voter {i} votes {a_i}, neither default nor within reach k={vt.k}"))
        if a_i != ABSTAIN:
            winners = possible_winners(ballots, i, vt.metric, vt.r)
            if len(winners) >= 2 and a_i in winners and all(
                    c == a_i or order.prefers(c, a_i) for c in winners):
                violations.append(Violation(
                    "least-preferred-possible-winner", None,
                    f"voter {i} votes {a_i}, their least preferred possible winner"))
    return violations
