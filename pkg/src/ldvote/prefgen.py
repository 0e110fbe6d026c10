"""Seeded preference-profile generators and PrefLib ingestion.

All generators are pure functions of (parameters, seed); the same seed always
yields the same profile.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .election import PreferenceOrder, PreferenceProfile

PL_WEIGHT_FLOOR = 1e-3


@dataclass(frozen=True)
class GroundTruth:
    """Per-candidate cardinal values in [0,1] behind a Plackett-Luce profile."""

    values: tuple[float, ...]

    def ranking(self) -> tuple[int, ...]:
        """Candidates from best to worst, value ties broken by index."""
        return tuple(sorted(range(len(self.values)), key=lambda c: (-self.values[c], c)))

    def rank_of(self, c: int) -> int:
        """0-based rank of candidate c (0 = best)."""
        return self.ranking().index(c)


def gen_impartial_culture(n: int, m: int, seed: int) -> PreferenceProfile:
    """Each order drawn independently and uniformly from all m! permutations."""
    rng = random.Random(seed)
    orders = []
    for _ in range(n):
        perm = list(range(m))
        rng.shuffle(perm)
        orders.append(PreferenceOrder(perm))
    return PreferenceProfile(tuple(orders), m)


def single_peaked_geometry(n: int, m: int, seed: int) -> tuple[list[float], list[float]]:
    """Candidate positions and voter ideal points on [0,1] (candidates drawn first)."""
    rng = random.Random(seed)
    positions = [rng.random() for _ in range(m)]
    ideals = [rng.random() for _ in range(n)]
    return positions, ideals


def gen_single_peaked(n: int, m: int, seed: int) -> PreferenceProfile:
    """Voters rank candidates by distance to their ideal point on a shared axis."""
    positions, ideals = single_peaked_geometry(n, m, seed)
    orders = []
    for ideal in ideals:
        ranking = sorted(range(m), key=lambda c: (abs(positions[c] - ideal), c))
        orders.append(PreferenceOrder(ranking))
    return PreferenceProfile(tuple(orders), m)


def gen_urn(n: int, m: int, k: int, seed: int) -> PreferenceProfile:
    """k reference orders each carry 1/(k+1) of the urn; the last 1/(k+1) is
    spread uniformly over the other m!-k orders."""
    if k < 1:
        raise ValueError("k must be positive")
    n_orders = math.factorial(m)
    if n_orders < k:
        raise ValueError(f"m! = {n_orders} < k = {k}: cannot pick k distinct reference orders")
    rng = random.Random(seed)

    def draw_order() -> tuple[int, ...]:
        perm = list(range(m))
        rng.shuffle(perm)
        return tuple(perm)

    refs: list[tuple[int, ...]] = []
    while len(refs) < k:
        perm = draw_order()
        if perm not in refs:
            refs.append(perm)
    ref_set = set(refs)

    orders = []
    for _ in range(n):
        slot = rng.randrange(k + 1)
        if slot < k:
            orders.append(PreferenceOrder(refs[slot]))
        elif n_orders == k:
            # degenerate urn: no non-reference orders exist, remainder mass
            # falls back onto the references
            orders.append(PreferenceOrder(refs[rng.randrange(k)]))
        else:
            while True:
                perm = draw_order()
                if perm not in ref_set:
                    orders.append(PreferenceOrder(perm))
                    break
    return PreferenceProfile(tuple(orders), m)


def gen_riffle(n: int, m: int, seed: int) -> PreferenceProfile:
    """Interleave two fixed reference orders on a random split of the candidates,
    with a fresh uniform interleaving per voter."""
    if m < 2:
        raise ValueError("riffle needs at least two candidates")
    rng = random.Random(seed)
    half1 = sorted(rng.sample(range(m), m // 2))
    half2 = [c for c in range(m) if c not in half1]
    rng.shuffle(half1)
    rng.shuffle(half2)

    orders = []
    for _ in range(n):
        slots = sorted(rng.sample(range(m), len(half1)))
        ranking = [-1] * m
        it1 = iter(half1)
        it2 = iter(half2)
        slot_set = set(slots)
        for pos in range(m):
            ranking[pos] = next(it1) if pos in slot_set else next(it2)
        orders.append(PreferenceOrder(ranking))
    return PreferenceProfile(tuple(orders), m)


def gen_plackett_luce(n: int, m: int, seed: int) -> tuple[PreferenceProfile, GroundTruth]:
    """Sequential-choice sampling with weights equal to uniform [0,1] candidate
    values (floored at PL_WEIGHT_FLOOR)."""
    rng = random.Random(seed)
    values = [rng.random() for _ in range(m)]
    weights = [max(v, PL_WEIGHT_FLOOR) for v in values]
    orders = []
    for _ in range(n):
        remaining = list(range(m))
        rem_weights = [weights[c] for c in remaining]
        ranking = []
        while remaining:
            u = rng.random() * sum(rem_weights)
            acc = 0.0
            pick = len(remaining) - 1
            for idx, w in enumerate(rem_weights):
                acc += w
                if u < acc:
                    pick = idx
                    break
            ranking.append(remaining.pop(pick))
            rem_weights.pop(pick)
        orders.append(PreferenceOrder(ranking))
    return PreferenceProfile(tuple(orders), m), GroundTruth(tuple(values))


class PrefLibError(ValueError):
    pass


def parse_preflib(text: str) -> PreferenceProfile:
    """Parse strict complete orders in PrefLib format.

    Metadata lines start with '#' (NUMBER ALTERNATIVES is honored when present);
    data lines read '<multiplicity>: <id>,<id>,...' with 1-based candidate ids.
    Candidate id j maps to index j-1, so file order defines the tie-break
    priority.
    """
    m: int | None = None
    orders: list[PreferenceOrder] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.upper().startswith("NUMBER ALTERNATIVES"):
                _, _, val = body.partition(":")
                try:
                    m = int(val.strip())
                except ValueError:
                    raise PrefLibError(f"line {lineno}: bad NUMBER ALTERNATIVES value {val.strip()!r}")
                if m < 1:
                    raise PrefLibError(f"line {lineno}: NUMBER ALTERNATIVES must be positive")
            continue
        mult_str, sep, rest = line.partition(":")
        if not sep:
            raise PrefLibError(f"line {lineno}: malformed line (expected '<count>: <order>'): {line!r}")
        try:
            mult = int(mult_str.strip())
        except ValueError:
            raise PrefLibError(f"line {lineno}: multiplicity {mult_str.strip()!r} is not an integer")
        if mult < 1:
            raise PrefLibError(f"line {lineno}: multiplicity must be positive")
        tokens = [t.strip() for t in rest.split(",")]
        try:
            ids = [int(t) for t in tokens]
        except ValueError:
            raise PrefLibError(f"line {lineno}: non-integer candidate id in {rest.strip()!r}")
        if m is None:
            m = len(ids)
        if len(set(ids)) != len(ids):
            raise PrefLibError(f"line {lineno}: duplicate candidate in order")
        for j in ids:
            if not 1 <= j <= m:
                raise PrefLibError(f"line {lineno}: unknown candidate id {j} (expected 1..{m})")
        if len(ids) != m:
            raise PrefLibError(f"line {lineno}: incomplete order ({len(ids)} of {m} candidates)")
        order = PreferenceOrder([j - 1 for j in ids])
        orders.extend([order] * mult)
    if not orders:
        raise PrefLibError("no preference data lines found")
    return PreferenceProfile(tuple(orders), m)
