"""Iterative Plurality voting under local-dominance strategies."""

from .election import (
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
from .dominance import (
    AccessibleStateSet,
    Bias,
    EnumerationBudgetError,
    Metric,
    StepType,
    UnsupportedMetricError,
    VoterType,
    accessible_set,
    accessible_states_enumerate,
    biased_response,
    classify_step,
    dominating_set,
    possible_winners,
    s_beats,
    s_dominates,
    strategic_response,
    threshold_beta,
)
from .dynamics import (
    Scheduler,
    SchedulerKind,
    StepRecord,
    Trace,
    Violation,
    check_equilibrium_properties,
    chunk_boundary_potentials,
    chunk_potential,
    is_equilibrium,
    pending_moves,
    replay,
    run_to_equilibrium,
    states_by_tick,
    verify_trace_invariants,
)
from .prefgen import (
    GroundTruth,
    PrefLibError,
    gen_impartial_culture,
    gen_plackett_luce,
    gen_riffle,
    gen_single_peaked,
    gen_urn,
    parse_preflib,
    single_peaked_geometry,
)
from .outcomes import (
    ResultRow,
    aggregate,
    borda_scores,
    borda_winner,
    condorcet_winner,
    copeland_winner,
    maximin_winner,
    pairwise_support,
    social_welfare_rank,
)
from .batch import (
    ConfigError,
    ExperimentConfig,
    load_config,
    resolve_cells,
    run_experiment,
    run_preflib,
)

__all__ = [name for name in dir() if not name.startswith("_")]
