"""Batch orchestration: experiment configs, deterministic seeding, the r-sweep
grid, CSV emission, trace dumps, and runs on ingested PrefLib profiles.

Output is byte-identical for a given (config, master_seed) regardless of the
worker count: run seeds derive from (master_seed, cell, profile, repetition)
and rows are written in fixed index order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import random
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .election import ABSTAIN, BallotProfile, PreferenceOrder, PreferenceProfile
from .dominance import Bias, Metric, StepType, VoterType
from .dynamics import (
    Scheduler,
    SchedulerKind,
    StepRecord,
    Trace,
    run_to_equilibrium,
    states_by_tick,
    verify_trace_invariants,
)
from .outcomes import ResultRow, aggregate
from .prefgen import (
    GroundTruth,
    gen_impartial_culture,
    gen_plackett_luce,
    gen_riffle,
    gen_single_peaked,
    gen_urn,
    parse_preflib,
)


class ConfigError(ValueError):
    pass


DISTRIBUTIONS = ("uniform", "single_peaked", "urn", "riffle", "plackett_luce")

_METRIC_ALIASES = {
    "l1": Metric.L1,
    "linf": Metric.LINF,
    "l_inf": Metric.LINF,
    "mult": Metric.MULT,
    "multiplicative": Metric.MULT,
    "em": Metric.EM,
    "earthmover": Metric.EM,
}


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: Optional[str]
    metric: Metric
    r_tokens: tuple[str, ...]
    n: Optional[int] = None
    m: Optional[int] = None
    urn_k: Optional[int] = None
    k_tokens: Optional[tuple[str, ...]] = None
    bias: Bias = Bias.NONE
    diverse: bool = False
    scheduler: SchedulerKind = SchedulerKind.SINGLETON
    group_cap: Optional[int] = None
    opportunity_priority: bool = False
    p_singleton: float = 0.2
    initial_state: str = "truthful"
    profiles_per_cell: int = 200
    repetitions: int = 100
    master_seed: int = 0
    output_path: str = "results.csv"
    max_steps: Optional[int] = None
    trace_dump: bool = False


@dataclass(frozen=True)
class Cell:
    index: int
    r: object            # int | Fraction | "diverse"
    k: object            # int | Fraction | None
    diverse: bool = False

    @property
    def r_label(self) -> str:
        return "diverse" if self.diverse else str(self.r)

    @property
    def k_label(self) -> str:
        return "" if self.k is None else str(self.k)


def derive_seed(*parts) -> int:
    data = "|".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "big")


# -- config parsing ----------------------------------------------------------

_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}

_K_EXPR = re.compile(r"^(\d*)r([+-]\d+)?$")


def _parse_bool(val: str, key: str) -> bool:
    if val.lower() not in _BOOL:
        raise ConfigError(f"{key}: expected true/false, got {val!r}")
    return _BOOL[val.lower()]


def _parse_int(val: str, key: str) -> int:
    try:
        return int(val)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {val!r}")


def _radius_value(tok: str, metric: Metric, n: int):
    tok = tok.strip()
    if tok == "max":
        return Fraction(n) if metric is Metric.MULT else n
    if metric is Metric.MULT:
        if tok.endswith("/n"):
            return Fraction(int(tok[:-2]), n)
        return Fraction(tok)
    return int(tok)


def _expand_r_tokens(tokens: Sequence[str], metric: Metric, n: int, key: str):
    values = []
    for tok in tokens:
        try:
            if ".." in tok:
                lo_s, _, hi_s = tok.partition("..")
                lo, hi = int(lo_s), int(hi_s)
                if metric is Metric.MULT:
                    raise ConfigError(f"{key}: integer ranges are not valid for the multiplicative metric")
                if hi < lo:
                    raise ConfigError(f"{key}: empty range {tok!r}")
                values.extend(range(lo, hi + 1))
            else:
                values.append(_radius_value(tok, metric, n))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{key}: cannot parse radius token {tok!r}")
    if not values:
        raise ConfigError(f"{key}: no values")
    return values


def _k_value(tok: str, r, metric: Metric, n: int):
    tok = tok.strip()
    match = _K_EXPR.match(tok)
    if match:
        coef = int(match.group(1)) if match.group(1) else 1
        off = int(match.group(2)) if match.group(2) else 0
        return coef * r + off
    return _radius_value(tok, metric, n)


def resolve_cells(cfg: ExperimentConfig, n: int) -> list[Cell]:
    """The grid of (r, k) cells, validated; diverse populations use one cell."""
    if cfg.diverse:
        return [Cell(0, "diverse", None, diverse=True)]
    rs = _expand_r_tokens(cfg.r_tokens, cfg.metric, n, "r")
    cells = []
    idx = 0
    for r in rs:
        if cfg.bias is Bias.NONE:
            ks = [None]
        else:
            ks = []
            for tok in cfg.k_tokens:
                try:
                    k = _k_value(tok, r, cfg.metric, n)
                except (ValueError, ZeroDivisionError):
                    raise ConfigError(f"k: cannot parse token {tok!r}")
                if k <= r:
                    raise ConfigError(f"k: {tok!r} gives k={k} <= r={r}; biased voters need k > r")
                ks.append(k)
        for k in ks:
            cells.append(Cell(idx, r, k))
            idx += 1
    return cells


_KNOWN_KEYS = {
    "n", "m", "distribution", "urn_k", "metric", "r", "k", "bias", "diverse",
    "scheduler", "group_cap", "opportunity_priority", "p_singleton",
    "initial_state", "profiles_per_cell", "repetitions", "master_seed",
    "output_path", "max_steps", "trace_dump",
}


def load_config(path, for_preflib: bool = False) -> ExperimentConfig:
    """Parse a flat `key = value` config file (``#`` starts a comment)."""
    text = Path(path).read_text(encoding="utf-8")
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip()
        val = val.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not val:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        pairs[key] = val

    def take(key: str) -> Optional[str]:
        return pairs.pop(key, None)

    required = [] if for_preflib else ["n", "m", "distribution"]
    required.append("r")
    for key in required:
        if key not in pairs:
            raise ConfigError(f"missing required key {key!r}")

    n = m = None
    if (val := take("n")) is not None:
        n = _parse_int(val, "n")
        if n < 1:
            raise ConfigError("n: must be at least 1")
    if (val := take("m")) is not None:
        m = _parse_int(val, "m")
        if m < 1:
            raise ConfigError("m: must be at least 1")

    distribution = None
    if (val := take("distribution")) is not None:
        distribution = {"impartial_culture": "uniform"}.get(val, val)
        if distribution not in DISTRIBUTIONS:
            raise ConfigError(f"distribution: unknown distribution {val!r}")

    urn_k = None
    if (val := take("urn_k")) is not None:
        urn_k = _parse_int(val, "urn_k")
        if urn_k not in (2, 3):
            raise ConfigError("urn_k: must be 2 or 3")
    if distribution == "urn" and urn_k is None:
        raise ConfigError("urn_k: required for the urn distribution")
    if distribution == "riffle" and m is not None and m < 2:
        raise ConfigError("m: riffle needs at least two candidates")

    metric = Metric.L1
    if (val := take("metric")) is not None:
        if val.lower() not in _METRIC_ALIASES:
            raise ConfigError(f"metric: unknown metric {val!r}")
        metric = _METRIC_ALIASES[val.lower()]

    r_tokens = tuple(t.strip() for t in take("r").split(",") if t.strip())
    if not r_tokens:
        raise ConfigError("r: no values given")

    bias = Bias.NONE
    if (val := take("bias")) is not None:
        try:
            bias = Bias(val.lower())
        except ValueError:
            raise ConfigError(f"bias: expected none/truth/lazy, got {val!r}")

    k_tokens = None
    if (val := take("k")) is not None:
        if bias is Bias.NONE:
            raise ConfigError("k: only meaningful with bias = truth or lazy")
        k_tokens = tuple(t.strip() for t in val.split(",") if t.strip())
    if bias is not Bias.NONE and k_tokens is None:
        raise ConfigError("k: required when bias is set")

    diverse = False
    if (val := take("diverse")) is not None:
        diverse = _parse_bool(val, "diverse")
    if diverse and bias is not Bias.NONE:
        raise ConfigError("diverse: diverse populations are bias-free")

    scheduler = SchedulerKind.SINGLETON
    if (val := take("scheduler")) is not None:
        try:
            scheduler = SchedulerKind(val.lower())
        except ValueError:
            raise ConfigError(f"scheduler: expected singleton/group, got {val!r}")

    group_cap = None
    if (val := take("group_cap")) is not None:
        group_cap = _parse_int(val, "group_cap")
        if group_cap < 1:
            raise ConfigError("group_cap: must be at least 1")

    opportunity_priority = False
    if (val := take("opportunity_priority")) is not None:
        opportunity_priority = _parse_bool(val, "opportunity_priority")

    p_singleton = 0.2
    if (val := take("p_singleton")) is not None:
        try:
            p_singleton = float(val)
        except ValueError:
            raise ConfigError(f"p_singleton: expected a number, got {val!r}")
        if not 0.0 <= p_singleton <= 1.0:
            raise ConfigError("p_singleton: must be in [0, 1]")

    initial_state = "truthful"
    if (val := take("initial_state")) is not None:
        if val not in ("truthful", "random"):
            raise ConfigError(f"initial_state: expected truthful/random, got {val!r}")
        initial_state = val

    profiles_per_cell = 200
    if (val := take("profiles_per_cell")) is not None:
        profiles_per_cell = _parse_int(val, "profiles_per_cell")
        if profiles_per_cell < 1:
            raise ConfigError("profiles_per_cell: must be at least 1")

    repetitions = 100
    if (val := take("repetitions")) is not None:
        repetitions = _parse_int(val, "repetitions")
        if repetitions < 1:
            raise ConfigError("repetitions: must be at least 1")

    master_seed = 0
    if (val := take("master_seed")) is not None:
        master_seed = _parse_int(val, "master_seed")

    output_path = "results.csv"
    if (val := take("output_path")) is not None:
        output_path = val

    max_steps = None
    if (val := take("max_steps")) is not None:
        max_steps = _parse_int(val, "max_steps")
        if max_steps < 1:
            raise ConfigError("max_steps: must be at least 1")

    trace_dump = False
    if (val := take("trace_dump")) is not None:
        trace_dump = _parse_bool(val, "trace_dump")

    cfg = ExperimentConfig(
        distribution=distribution, metric=metric, r_tokens=r_tokens, n=n, m=m,
        urn_k=urn_k, k_tokens=k_tokens, bias=bias, diverse=diverse,
        scheduler=scheduler, group_cap=group_cap,
        opportunity_priority=opportunity_priority, p_singleton=p_singleton,
        initial_state=initial_state, profiles_per_cell=profiles_per_cell,
        repetitions=repetitions, master_seed=master_seed,
        output_path=output_path, max_steps=max_steps, trace_dump=trace_dump,
    )
    if not for_preflib:
        resolve_cells(cfg, n)  # surface radius / k errors at load time
        if distribution == "urn" and math_factorial_at_most(m, urn_k):
            raise ConfigError("urn_k: m! must exceed the number of reference orders")
    return cfg


def math_factorial_at_most(m: int, k: int) -> bool:
    fact = 1
    for i in range(2, m + 1):
        fact *= i
        if fact > k:
            return False
    return fact <= k


# -- running -----------------------------------------------------------------


def generate_profile(cfg: ExperimentConfig, profile_idx: int
                     ) -> tuple[PreferenceProfile, Optional[GroundTruth]]:
    """Profiles are shared across cells: the seed depends only on the profile index."""
    seed = derive_seed(cfg.master_seed, "profile", profile_idx)
    n, m = cfg.n, cfg.m
    if cfg.distribution == "uniform":
        return gen_impartial_culture(n, m, seed), None
    if cfg.distribution == "single_peaked":
        return gen_single_peaked(n, m, seed), None
    if cfg.distribution == "urn":
        return gen_urn(n, m, cfg.urn_k, seed), None
    if cfg.distribution == "riffle":
        return gen_riffle(n, m, seed), None
    if cfg.distribution == "plackett_luce":
        return gen_plackett_luce(n, m, seed)
    raise ConfigError(f"distribution: unknown distribution {cfg.distribution!r}")


def _voter_types(cfg: ExperimentConfig, cell: Cell, n: int, m: int, seed: int) -> list[VoterType]:
    if cell.diverse:
        rng = random.Random(seed)
        cap = max(0, n // m)
        return [VoterType(cfg.metric, rng.randint(0, cap)) for _ in range(n)]
    return [VoterType(cfg.metric, cell.r, cell.k, cfg.bias)] * n


def _initial_ballots(cfg: ExperimentConfig, profile: PreferenceProfile, seed: int) -> BallotProfile:
    if cfg.initial_state == "truthful":
        return profile.truthful_ballots()
    rng = random.Random(seed)
    return BallotProfile(tuple(rng.randrange(profile.m) for _ in range(profile.n)), profile.m)


def _proved_regime(cfg: ExperimentConfig) -> bool:
    return (cfg.initial_state == "truthful"
            and cfg.scheduler is SchedulerKind.SINGLETON
            and not cfg.diverse
            and cfg.metric is not Metric.EM)


def run_cell_profile(cfg: ExperimentConfig, cell: Cell, profile: PreferenceProfile,
                     ground: Optional[GroundTruth], profile_idx: int,
                     trace_dir: Optional[Path] = None) -> ResultRow:
    n, m = profile.n, profile.m
    scheduler = Scheduler(cfg.scheduler, cfg.group_cap, cfg.opportunity_priority, cfg.p_singleton)
    max_steps = cfg.max_steps if cfg.max_steps is not None else 10 * n * m
    traces = []
    for rep in range(cfg.repetitions):
        vts = _voter_types(cfg, cell, n, m, derive_seed(cfg.master_seed, "types", cell.index, profile_idx, rep))
        initial = _initial_ballots(cfg, profile, derive_seed(cfg.master_seed, "init", cell.index, profile_idx, rep))
        seed = derive_seed(cfg.master_seed, "run", cell.index, profile_idx, rep)
        trace = run_to_equilibrium(profile, vts, initial, scheduler, seed, max_steps)
        if not trace.converged and _proved_regime(cfg):
            raise RuntimeError(
                f"non-convergence in a proved regime (cell r={cell.r_label}, "
                f"profile {profile_idx}, rep {rep}, seed {seed}); this indicates a bug")
        traces.append(trace)
        if trace_dir is not None:
            path = trace_dir / f"cell{cell.index:03d}_profile{profile_idx:04d}_rep{rep:04d}.trace"
            write_trace(path, profile, trace, cfg, cell, seed)
    return aggregate(profile, traces, ground)


def _run_task(args) -> tuple[int, int, ResultRow]:
    cfg, cell, profile_idx, trace_dir = args
    profile, ground = generate_profile(cfg, profile_idx)
    row = run_cell_profile(cfg, cell, profile, ground, profile_idx,
                           Path(trace_dir) if trace_dir else None)
    return cell.index, profile_idx, row


PARAM_FIELDS = ("n", "m", "distribution", "metric", "r", "k", "bias",
                "scheduler", "initial_state", "profile")
RESULT_FIELDS = tuple(f.name for f in dataclasses.fields(ResultRow))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _mean_row(rows: Sequence[ResultRow]) -> list:
    out = []
    for name in RESULT_FIELDS:
        vals = [getattr(r, name) for r in rows]
        finite = [v for v in vals if v is not None]
        out.append(sum(finite) / len(finite) if finite else None)
    return out


def _write_csv(cfg: ExperimentConfig, cells: Sequence[Cell], n: int, m: int,
               distribution: str,
               results: dict[tuple[int, int], ResultRow],
               profiles_per_cell: int) -> Path:
    out = Path(cfg.output_path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(PARAM_FIELDS + RESULT_FIELDS)]
    for cell in cells:
        params = [str(n), str(m), distribution, cfg.metric.value,
                  cell.r_label, cell.k_label, cfg.bias.value,
                  cfg.scheduler.value, cfg.initial_state]
        rows = []
        for pi in range(profiles_per_cell):
            row = results[(cell.index, pi)]
            rows.append(row)
            values = [_fmt(getattr(row, f)) for f in RESULT_FIELDS]
            lines.append(",".join(params + [str(pi)] + values))
        lines.append(",".join(params + ["mean"] + [_fmt(v) for v in _mean_row(rows)]))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return out


def _trace_dir_for(cfg: ExperimentConfig) -> Optional[Path]:
    if not cfg.trace_dump:
        return None
    out = Path(cfg.output_path)
    d = out.with_name(out.stem + "_traces")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _run_grid(cfg: ExperimentConfig, cells: Sequence[Cell], workers: int,
              profile_source=None) -> dict[tuple[int, int], ResultRow]:
    trace_dir = _trace_dir_for(cfg)
    results: dict[tuple[int, int], ResultRow] = {}
    if profile_source is None and workers > 1:
        tasks = [(cfg, cell, pi, str(trace_dir) if trace_dir else None)
                 for cell in cells for pi in range(cfg.profiles_per_cell)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for ci, pi, row in pool.map(_run_task, tasks, chunksize=1):
                results[(ci, pi)] = row
        return results
    for cell in cells:
        for pi in range(cfg.profiles_per_cell):
            if profile_source is None:
                profile, ground = generate_profile(cfg, pi)
            else:
                profile, ground = profile_source
            results[(cell.index, pi)] = run_cell_profile(
                cfg, cell, profile, ground, pi, trace_dir)
    return results


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> Path:
    """Run the full grid and write one CSV: a row per (cell, profile) plus a
    mean row per cell."""
    if cfg.n is None or cfg.m is None or cfg.distribution is None:
        raise ConfigError("n, m and distribution are required to run an experiment")
    cells = resolve_cells(cfg, cfg.n)
    results = _run_grid(cfg, cells, workers)
    return _write_csv(cfg, cells, cfg.n, cfg.m, cfg.distribution, results,
                      cfg.profiles_per_cell)


def run_preflib(cfg: ExperimentConfig, profile_path, workers: int = 1) -> Path:
    """Run the configured sweep on one ingested PrefLib profile."""
    path = Path(profile_path)
    profile = parse_preflib(path.read_text(encoding="utf-8"))
    cells = resolve_cells(cfg, profile.n)
    cfg = dataclasses.replace(cfg, profiles_per_cell=1)
    results = _run_grid(cfg, cells, workers, profile_source=(profile, None))
    return _write_csv(cfg, cells, profile.n, profile.m,
                      f"preflib:{path.name}", results, 1)


# -- trace dump / offline verification ---------------------------------------


def write_trace(path: Path, profile: PreferenceProfile, trace: Trace,
                cfg: ExperimentConfig, cell: Cell, seed: int) -> None:
    lines = ["# ldvote trace v1"]
    lines.append(
        f"n={profile.n} m={profile.m} metric={cfg.metric.value} r={cell.r_label} "
        f"k={cell.k_label or '-'} bias={cfg.bias.value} seed={seed} "
        f"converged={int(trace.converged)}")
    for i, order in enumerate(profile.orders):
        lines.append(f"pref {i} = {','.join(map(str, order.ranking))}")
    lines.append(f"initial = {','.join(map(str, trace.initial.votes))}")
    for s in trace.steps:
        lines.append(f"step {s.time} {s.voter} {s.action_from} {s.action_to} {s.step_type.value}")
    lines.append(f"final = {','.join(map(str, trace.final.votes))}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace(path: Path) -> tuple[PreferenceProfile, Trace, dict]:
    """Rebuild (profile, trace, metadata) from a dump; scores are recomputed."""
    meta: dict = {}
    orders: dict[int, PreferenceOrder] = {}
    initial_votes = final_votes = None
    raw_steps: list[tuple[int, int, int, int, StepType]] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("pref "):
            head, _, val = line.partition("=")
            idx = int(head.split()[1])
            orders[idx] = PreferenceOrder([int(t) for t in val.strip().split(",")])
        elif line.startswith("initial"):
            initial_votes = tuple(int(t) for t in line.partition("=")[2].strip().split(","))
        elif line.startswith("final"):
            final_votes = tuple(int(t) for t in line.partition("=")[2].strip().split(","))
        elif line.startswith("step "):
            _, t, voter, frm, to, stype = line.split()
            raw_steps.append((int(t), int(voter), int(frm), int(to), StepType(int(stype))))
        else:
            for token in line.split():
                key, _, val = token.partition("=")
                meta[key] = val
    n, m = int(meta["n"]), int(meta["m"])
    profile = PreferenceProfile(tuple(orders[i] for i in range(n)), m)
    initial = BallotProfile(initial_votes, m)
    # replay to recover the per-tick score vectors
    scores = [0] * m
    for v in initial_votes:
        if v != ABSTAIN:
            scores[v] += 1
    steps: list[StepRecord] = []
    pending: list[tuple[int, int, int, int, StepType]] = []
    cur = None

    def flush():
        nonlocal pending
        if not pending:
            return
        before = tuple(scores)
        for _, voter, frm, to, _ in pending:
            if frm != ABSTAIN:
                scores[frm] -= 1
            if to != ABSTAIN:
                scores[to] += 1
        after = tuple(scores)
        for t, voter, frm, to, stype in pending:
            steps.append(StepRecord(t, voter, frm, to, stype, before, after))
        pending = []

    for rec in raw_steps:
        if cur is not None and rec[0] != cur:
            flush()
        cur = rec[0]
        pending.append(rec)
    flush()
    trace = Trace(initial, tuple(steps), BallotProfile(final_votes, m),
                  meta.get("converged") == "1")
    return profile, trace, meta


def verify_trace_dir(trace_dir) -> tuple[int, int, int]:
    """Re-run the invariant audit on every dumped trace; returns
    (files, checked, violations)."""
    files = sorted(Path(trace_dir).glob("*.trace"))
    checked = 0
    total_violations = 0
    for path in files:
        profile, trace, meta = read_trace(path)
        if meta.get("bias", "none") != "none" or meta.get("r") == "diverse":
            print(f"{path.name}: skipped (not a homogeneous bias-free trace)")
            continue
        metric = _METRIC_ALIASES[meta["metric"]]
        r = Fraction(meta["r"]) if metric is Metric.MULT else int(meta["r"])
        violations = verify_trace_invariants(profile, trace, metric, r)
        checked += 1
        total_violations += len(violations)
        status = "ok" if not violations else f"{len(violations)} violation(s)"
        print(f"{path.name}: {status}")
        for v in violations:
            print(f"  - {v.kind} (t={v.time}): {v.detail}")
    return len(files), checked, total_violations
