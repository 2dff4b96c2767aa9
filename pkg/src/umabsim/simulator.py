"""Trial and ensemble runners with deterministic seeding.

A trial is one policy playing one environment for `horizon` rounds from a
single 64-bit seed. An ensemble repeats trials (and, for random graph
kinds, graph draws) and aggregates pseudo-regret at log-spaced checkpoints.

Seed splitting is a pure function of (base_seed, stream, indices): graph
instance k uses derive_seed(base_seed, GRAPH_STREAM, k) and trial j on
graph k uses derive_seed(base_seed, TRIAL_STREAM, k, j). Runs are therefore
reproducible bit-for-bit from the base seed alone, on either backend and at
any worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .core import lower_bound_constant
from .environments import (
    BernoulliEnvironment,
    UmabGraph,
    assign_rewards_by_distance,
    build_er_graph,
    build_line_graph,
    draw_reward,
    load_environment,
    path_graph,
)
from .policies import (
    DEFAULT_KLUCB_C,
    ArmStatistics,
    Policy,
    PolicyConfig,
    make_policy,
    update,
)

GRAPH_STREAM = 0
TRIAL_STREAM = 1

DEFAULT_NUM_CHECKPOINTS = 200

ENV_KINDS = ("line", "line_distance", "erdos_renyi", "file")


def derive_seed(base_seed: int, stream: int, *indices: int) -> int:
    """Split one base seed into independent 64-bit seeds.

    Feeds the tuple (base_seed, stream, len(indices), *indices) into a seed
    sequence and takes the first 64-bit word. The length term keeps tuples
    of different arity distinct (seed sequences pad entropy with zeros, so
    (s, 0) and (s, 0, 0) would otherwise collide); beyond that, collisions
    across distinct tuples are as unlikely as hash collisions.
    """
    if base_seed < 0:
        raise ValueError("base_seed must be >= 0")
    entropy = (int(base_seed), int(stream), len(indices), *(int(i) for i in indices))
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def checkpoint_grid(horizon: int, num_checkpoints: int = DEFAULT_NUM_CHECKPOINTS) -> np.ndarray:
    """Log-spaced integer rounds in [1, horizon], deduplicated, ending at
    horizon exactly."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if num_checkpoints < 1:
        raise ValueError("num_checkpoints must be >= 1")
    pts = np.rint(np.geomspace(1.0, float(horizon), num_checkpoints)).astype(np.int64)
    pts[-1] = horizon
    return np.unique(np.clip(pts, 1, horizon))


@dataclass(frozen=True)
class TrialTrace:
    """Full cumulative pseudo-regret curve of one trial.

    Regret is measured against the true means: each round adds
    max(mu) - mu[pulled arm], independent of the realized rewards.
    """

    horizon: int
    cumulative_regret: np.ndarray = field(repr=False)
    pulls: np.ndarray = field(repr=False)
    leader_count: np.ndarray = field(repr=False)
    seed: int

    @property
    def final_regret(self) -> float:
        return float(self.cumulative_regret[-1])


@dataclass(frozen=True)
class EnsembleSummary:
    """Mean regret curve with 95% normal-approximation half-widths.

    half_width_95 = 1.96 * sample std (ddof=1) / sqrt(num_trials); zero
    when only one trial was run. num_trials of 0 marks a summary read back
    from CSV, where the trial count is not recorded.
    """

    checkpoints: np.ndarray = field(repr=False)
    mean_regret: np.ndarray = field(repr=False)
    half_width_95: np.ndarray = field(repr=False)
    num_trials: int = 0

    @property
    def final_round(self) -> int:
        return int(self.checkpoints[-1])

    @property
    def final_regret(self) -> float:
        return float(self.mean_regret[-1])


@dataclass(frozen=True)
class EnvironmentSpec:
    """Declarative environment family as it appears in experiment configs.

    kind "line" is the deterministic triangular-mean path; "line_distance"
    is the path topology with a uniformly random optimum and distance-decay
    means; "erdos_renyi" draws a connected G(K, p) per graph index;
    "file" loads a pinned JSON instance.
    """

    kind: str
    num_arms: int = 0
    mu_min: float = 0.1
    mu_max: float = 0.9
    edge_prob: float | None = None
    num_graphs: int = 1
    path: str | None = None
    label: str | None = None
    max_attempts: int = 1_000_000

    def __post_init__(self) -> None:
        if self.kind not in ENV_KINDS:
            raise ValueError(f"unknown environment kind {self.kind!r}, expected one of {ENV_KINDS}")
        if self.kind == "file":
            if not self.path:
                raise ValueError("kind 'file' requires a path")
            if self.num_graphs != 1:
                raise ValueError("kind 'file' pins one instance; num_graphs must be 1")
        else:
            if self.num_arms < 1:
                raise ValueError("num_arms must be >= 1")
            if not (0.0 <= self.mu_min < self.mu_max <= 1.0):
                raise ValueError("need 0 <= mu_min < mu_max <= 1")
        if self.kind == "line" and self.num_graphs != 1:
            raise ValueError("kind 'line' is deterministic; num_graphs must be 1")
        if self.kind == "erdos_renyi":
            if self.edge_prob is None or not 0.0 <= self.edge_prob <= 1.0:
                raise ValueError("kind 'erdos_renyi' requires edge_prob in [0, 1]")
        if self.num_graphs < 1:
            raise ValueError("num_graphs must be >= 1")

    @property
    def output_label(self) -> str:
        if self.label:
            return self.label
        if self.kind == "line":
            return f"line{self.num_arms}"
        if self.kind == "line_distance":
            return f"linedist{self.num_arms}"
        if self.kind == "erdos_renyi":
            return f"er{self.num_arms}_p{self.edge_prob:g}"
        return Path(self.path).stem

    def build(self, base_seed: int, graph_index: int = 0) -> BernoulliEnvironment:
        """Materialize graph instance `graph_index` of this family."""
        if not 0 <= graph_index < self.num_graphs:
            raise ValueError(f"graph_index {graph_index} outside [0, {self.num_graphs})")
        if self.kind == "line":
            return build_line_graph(self.num_arms, self.mu_min, self.mu_max)
        if self.kind == "file":
            return load_environment(self.path)
        seed = derive_seed(base_seed, GRAPH_STREAM, graph_index)
        rng = np.random.Generator(np.random.PCG64(seed))
        if self.kind == "line_distance":
            graph = path_graph(self.num_arms)
        else:
            graph = build_er_graph(self.num_arms, self.edge_prob, rng, self.max_attempts)
        return assign_rewards_by_distance(graph, rng, self.mu_min, self.mu_max, seed=seed)

    def build_all(self, base_seed: int) -> list[BernoulliEnvironment]:
        return [self.build(base_seed, k) for k in range(self.num_graphs)]


def closed_neighborhood_csr(graph: UmabGraph) -> tuple[np.ndarray, np.ndarray]:
    """Closed neighborhoods of all arms in CSR form for the kernels."""
    indptr = np.zeros(graph.num_arms + 1, dtype=np.int64)
    rows = []
    for i in range(graph.num_arms):
        row = graph.closed_neighborhood(i)
        rows.extend(row)
        indptr[i + 1] = indptr[i] + len(row)
    return indptr, np.asarray(rows, dtype=np.int64)


def _run_trial_python(env: BernoulliEnvironment, policy: Policy, horizon: int,
                      rng: np.random.Generator) -> tuple[np.ndarray, ArmStatistics]:
    stats = ArmStatistics.zeros(env.num_arms)
    cumreg = np.empty(horizon)
    means = env.means
    mu_star = float(means.max())
    creg = 0.0
    for t in range(1, horizon + 1):
        decision = policy.step(stats, t, rng)
        reward = draw_reward(env, decision.chosen_arm, rng)
        update(stats, decision, reward)
        creg += mu_star - float(means[decision.chosen_arm])
        cumreg[t - 1] = creg
    return cumreg, stats


def run_trial(
    env: BernoulliEnvironment,
    policy: Policy,
    horizon: int,
    seed: int,
    backend: str | None = None,
) -> TrialTrace:
    """One seeded trial. The same seed gives a bit-identical trace on both
    backends; policies without a compiled implementation fall back to the
    Python loop regardless of the requested backend."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    chosen = _backend.resolve_backend(backend)
    if chosen == "compiled" and policy.kernel_id is not None:
        kernels = _backend.get_kernels()
        indptr, indices = closed_neighborhood_csr(env.graph)
        cumreg, pulls, leader_count = kernels.run_trial_kernel(
            policy.kernel_id,
            indptr,
            indices,
            env.means,
            horizon,
            np.random.PCG64(seed),
            getattr(policy, "c", DEFAULT_KLUCB_C),
            env.graph.max_degree,
        )
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        cumreg, stats = _run_trial_python(env, policy, horizon, rng)
        pulls, leader_count = stats.pulls, stats.leader_count
    return TrialTrace(
        horizon=horizon,
        cumulative_regret=cumreg,
        pulls=pulls,
        leader_count=leader_count,
        seed=seed,
    )


def _as_policy_config(policy) -> PolicyConfig:
    if isinstance(policy, PolicyConfig):
        return policy
    if isinstance(policy, str):
        return PolicyConfig(name=policy)
    raise TypeError(f"expected PolicyConfig or policy name, got {type(policy).__name__}")


def run_ensemble(
    env_spec,
    policy,
    horizon: int,
    num_trials: int,
    base_seed: int,
    num_graphs: int | None = None,
    workers: int = 1,
    num_checkpoints: int = DEFAULT_NUM_CHECKPOINTS,
    backend: str | None = None,
) -> EnsembleSummary:
    """Aggregate `num_trials` trials per graph instance at log-spaced rounds.

    `env_spec` may be an EnvironmentSpec, a prebuilt BernoulliEnvironment,
    or a list of prebuilt environments (one per graph index). `policy` is a
    PolicyConfig or bare policy name; graph-aware policies are instantiated
    per environment. Trials are independent and are dispatched to a thread
    pool when workers > 1; the reduction is by fixed (graph, trial) order,
    so worker count never affects the result. Threads only pay off on the
    compiled backend, which releases the GIL for the whole trial.
    """
    if num_trials < 1:
        raise ValueError("num_trials must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if isinstance(env_spec, BernoulliEnvironment):
        envs = [env_spec]
    elif isinstance(env_spec, EnvironmentSpec):
        g = env_spec.num_graphs if num_graphs is None else num_graphs
        envs = [env_spec.build(base_seed, k) for k in range(g)]
    else:
        envs = list(env_spec)
        if not envs:
            raise ValueError("need at least one environment")
    if num_graphs is not None and len(envs) != num_graphs:
        raise ValueError(f"expected {num_graphs} environments, got {len(envs)}")

    config = _as_policy_config(policy)
    policies = [make_policy(config, env) for env in envs]
    checkpoints = checkpoint_grid(horizon, num_checkpoints)
    idx = checkpoints - 1

    jobs = [
        (g * num_trials + j, g, derive_seed(base_seed, TRIAL_STREAM, g, j))
        for g in range(len(envs))
        for j in range(num_trials)
    ]
    matrix = np.empty((len(jobs), checkpoints.shape[0]))

    def one(job):
        _, g, seed = job
        trace = run_trial(envs[g], policies[g], horizon, seed, backend=backend)
        return trace.cumulative_regret[idx]

    if workers == 1:
        for job in jobs:
            matrix[job[0]] = one(job)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for job, values in zip(jobs, pool.map(one, jobs)):
                matrix[job[0]] = values

    mean = matrix.mean(axis=0)
    if matrix.shape[0] > 1:
        hw = 1.96 * matrix.std(axis=0, ddof=1) / np.sqrt(matrix.shape[0])
    else:
        hw = np.zeros_like(mean)
    return EnsembleSummary(
        checkpoints=checkpoints,
        mean_regret=mean,
        half_width_95=hw,
        num_trials=matrix.shape[0],
    )


@dataclass(frozen=True)
class RegretRatio:
    """Ratio of final mean regrets with a delta-method 95% half-width."""

    value: float
    half_width_95: float
    final_round: int


def regret_ratio(numerator: EnsembleSummary, denominator: EnsembleSummary) -> RegretRatio:
    """Final-checkpoint regret ratio numerator/denominator.

    Requires matching checkpoint grids (same horizons). The half-width
    propagates both summaries' uncertainties through the quotient to first
    order: r * sqrt((ha/a)^2 + (hb/b)^2).
    """
    if not np.array_equal(numerator.checkpoints, denominator.checkpoints):
        raise ValueError("summaries have different checkpoint grids")
    a = numerator.final_regret
    b = denominator.final_regret
    if b <= 0.0:
        raise ValueError("denominator regret must be positive")
    r = a / b
    ha = float(numerator.half_width_95[-1])
    hb = float(denominator.half_width_95[-1])
    rel_a = ha / a if a > 0.0 else 0.0
    hw = abs(r) * float(np.hypot(rel_a, hb / b))
    return RegretRatio(value=r, half_width_95=hw, final_round=numerator.final_round)


@dataclass(frozen=True)
class LogSlopeDiagnostic:
    """Least-squares slope of mean regret against log(round) over the last
    decade of checkpoints, compared against the instance's lower-bound
    constant and against a plain linear-in-round fit."""

    slope: float
    intercept: float
    lower_bound: float
    finite_positive: bool
    linear_trend: bool
    log_fit_sse: float
    linear_fit_sse: float


def log_slope_check(summary: EnsembleSummary, env: BernoulliEnvironment) -> LogSlopeDiagnostic:
    """Fit regret ~ a*log(t) + b on checkpoints in [horizon/10, horizon].

    `linear_trend` is True when a straight line in t fits that window
    better than the logarithmic fit, the signature of a policy with
    linear regret. Requires horizon >= 10^4 so the window spans a full
    decade with enough checkpoints.
    """
    t = summary.checkpoints.astype(np.float64)
    horizon = t[-1]
    if horizon < 10_000:
        raise ValueError("need horizon >= 10000 for a last-decade fit")
    mask = t >= horizon / 10.0
    if int(mask.sum()) < 3:
        raise ValueError("not enough checkpoints in the last decade")
    x = np.log(t[mask])
    y = summary.mean_regret[mask]
    slope, intercept = np.polyfit(x, y, 1)
    sse_log = float(((slope * x + intercept - y) ** 2).sum())
    lin_a, lin_b = np.polyfit(t[mask], y, 1)
    sse_lin = float(((lin_a * t[mask] + lin_b - y) ** 2).sum())
    return LogSlopeDiagnostic(
        slope=float(slope),
        intercept=float(intercept),
        lower_bound=lower_bound_constant(env),
        finite_positive=bool(np.isfinite(slope) and slope > 0.0),
        linear_trend=bool(sse_lin < sse_log),
        log_fit_sse=sse_log,
        linear_fit_sse=sse_lin,
    )


CSV_HEADER = ("round", "mean_regret", "half_width_95")


def write_summary_csv(summary: EnsembleSummary, path) -> None:
    """One row per checkpoint; floats are written in shortest round-trip
    form so identical runs produce byte-identical files."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for i in range(summary.checkpoints.shape[0]):
            writer.writerow(
                [
                    int(summary.checkpoints[i]),
                    repr(float(summary.mean_regret[i])),
                    repr(float(summary.half_width_95[i])),
                ]
            )


def read_summary_csv(path) -> EnsembleSummary:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r} in {path}")
        rounds, means, hws = [], [], []
        for row in reader:
            rounds.append(int(row[0]))
            means.append(float(row[1]))
            hws.append(float(row[2]))
    if not rounds:
        raise ValueError(f"no data rows in {path}")
    return EnsembleSummary(
        checkpoints=np.asarray(rounds, dtype=np.int64),
        mean_regret=np.asarray(means),
        half_width_95=np.asarray(hws),
        num_trials=0,
    )
