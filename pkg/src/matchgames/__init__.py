"""Matching markets whose pairs play zero-sum games, learned from bandit feedback.

The pieces compose bottom-up: ``linprog`` solves small dense LPs, ``games``
turns those into matrix-game values and maximin strategies, ``market`` holds
instances, matchings and deferred acceptance, ``instability`` scores how far
an outcome is from a stable equilibrium, ``learning`` runs the optimistic
simulation loop, and ``experiments`` batches runs into trace files.
"""

from .errors import DimensionError, FormatError, InputError
from .experiments import (
    ExperimentConfig,
    RegretTrace,
    audit,
    read_aggregate_file,
    read_trace_file,
    run_experiment,
    theoretical_bound,
)
from .games import (
    GameSolution,
    best_response,
    game_value,
    maximin,
    oracle_solve_game,
    solve_game,
)
from .instability import (
    InstabilityReport,
    SubsidyVector,
    matching_instability,
    oracle_mi,
    realized_utilities,
    single_pair_deviation,
    subset_instability,
)
from .learning import (
    ConfidenceState,
    Policy,
    StepRecord,
    auto_delta,
    lcb_matrix,
    run_episode,
    ucb_matrix,
)
from .linprog import LinearProgram, LpSolution, LpStatus, solve_lp
from .market import (
    AgentId,
    Generator,
    MarketInstance,
    Matching,
    PreferenceProfile,
    Side,
    StabilityReport,
    UtilityTable,
    deferred_acceptance,
    generate_instance,
    is_stable,
    preferences_from_values,
)

__version__ = "0.1.0"

__all__ = [
    "AgentId",
    "ConfidenceState",
    "DimensionError",
    "ExperimentConfig",
    "FormatError",
    "GameSolution",
    "Generator",
    "InputError",
    "InstabilityReport",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "MarketInstance",
    "Matching",
    "Policy",
    "PreferenceProfile",
    "RegretTrace",
    "Side",
    "StabilityReport",
    "StepRecord",
    "SubsidyVector",
    "UtilityTable",
    "audit",
    "auto_delta",
    "best_response",
    "deferred_acceptance",
    "game_value",
    "generate_instance",
    "is_stable",
    "lcb_matrix",
    "matching_instability",
    "maximin",
    "oracle_mi",
    "oracle_solve_game",
    "preferences_from_values",
    "read_aggregate_file",
    "read_trace_file",
    "realized_utilities",
    "run_episode",
    "run_experiment",
    "single_pair_deviation",
    "solve_game",
    "solve_lp",
    "subset_instability",
    "theoretical_bound",
    "ucb_matrix",
]
