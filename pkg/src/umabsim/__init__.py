"""Simulation library for unimodal multi-armed bandits on graphs.

Implements unimodal Thompson sampling next to plain Thompson sampling,
KL-UCB, and the OSUB index policy, on Bernoulli environments whose mean
vectors are unimodal over an undirected arm graph. Trials run on a compiled
kernel when available and on a pure-Python loop otherwise, with bit-identical
results either way.
"""

from ._backend import active_backend, available_backends
from .core import (
    BetaPosterior,
    kl_bernoulli,
    klucb_index,
    lower_bound_constant,
    sample_beta,
)
from .environments import (
    BernoulliEnvironment,
    UmabGraph,
    assign_rewards_by_distance,
    build_er_graph,
    build_line_graph,
    draw_reward,
    env_from_dict,
    env_to_dict,
    load_environment,
    path_graph,
    save_environment,
    shortest_path_distances,
    verify_unimodal,
)
from .policies import (
    ArmStatistics,
    FixedArmPolicy,
    KlucbPolicy,
    OsubPolicy,
    Policy,
    PolicyConfig,
    PolicyDecision,
    TsPolicy,
    UniformPolicy,
    UtsPolicy,
    empirical_mean,
    empirical_means,
    exploration_rate,
    klucb_step,
    make_policy,
    osub_step,
    select_leader,
    ts_step,
    update,
    uts_step,
)
from .simulator import (
    GRAPH_STREAM,
    TRIAL_STREAM,
    EnsembleSummary,
    EnvironmentSpec,
    LogSlopeDiagnostic,
    RegretRatio,
    TrialTrace,
    checkpoint_grid,
    derive_seed,
    log_slope_check,
    read_summary_csv,
    regret_ratio,
    run_ensemble,
    run_trial,
    write_summary_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ArmStatistics",
    "BernoulliEnvironment",
    "BetaPosterior",
    "EnsembleSummary",
    "EnvironmentSpec",
    "FixedArmPolicy",
    "GRAPH_STREAM",
    "KlucbPolicy",
    "LogSlopeDiagnostic",
    "OsubPolicy",
    "Policy",
    "PolicyConfig",
    "PolicyDecision",
    "RegretRatio",
    "TRIAL_STREAM",
    "TrialTrace",
    "TsPolicy",
    "UmabGraph",
    "UniformPolicy",
    "UtsPolicy",
    "active_backend",
    "assign_rewards_by_distance",
    "available_backends",
    "build_er_graph",
    "build_line_graph",
    "checkpoint_grid",
    "derive_seed",
    "draw_reward",
    "empirical_mean",
    "empirical_means",
    "env_from_dict",
    "env_to_dict",
    "exploration_rate",
    "kl_bernoulli",
    "klucb_index",
    "klucb_step",
    "load_environment",
    "log_slope_check",
    "lower_bound_constant",
    "make_policy",
    "osub_step",
    "path_graph",
    "read_summary_csv",
    "regret_ratio",
    "run_ensemble",
    "run_trial",
    "sample_beta",
    "save_environment",
    "select_leader",
    "shortest_path_distances",
    "ts_step",
    "update",
    "uts_step",
    "verify_unimodal",
    "write_summary_csv",
]
