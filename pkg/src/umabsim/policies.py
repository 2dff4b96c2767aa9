"""Arm-selection policies.

Four policies share one stepping contract: given per-arm statistics and the
1-based round index, return the arm to pull (plus the current leader for the
graph-aware policies). The runner applies the reward afterwards through
`update`, so policy steps never mutate statistics.

All randomized tie-breaks consume exactly one uniform draw, and only when
there is an actual tie, which keeps the compiled and pure-Python trial loops
on identical random streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import klucb_index
from .environments import BernoulliEnvironment, UmabGraph

DEFAULT_KLUCB_C = 3.0

POLICY_NAMES = ("uts", "ts", "klucb", "osub", "uniform")


@dataclass
class ArmStatistics:
    """Running sufficient statistics: reward sums, pull counts, and how many
    rounds each arm has spent as leader."""

    reward_sum: np.ndarray
    pulls: np.ndarray
    leader_count: np.ndarray

    @staticmethod
    def zeros(num_arms: int) -> "ArmStatistics":
        if num_arms < 1:
            raise ValueError("num_arms must be >= 1")
        return ArmStatistics(
            reward_sum=np.zeros(num_arms, dtype=np.float64),
            pulls=np.zeros(num_arms, dtype=np.int64),
            leader_count=np.zeros(num_arms, dtype=np.int64),
        )

    @property
    def num_arms(self) -> int:
        return self.reward_sum.shape[0]


@dataclass(frozen=True)
class PolicyDecision:
    """Arm chosen this round; `leader` is None for policies without one."""

    chosen_arm: int
    leader: int | None = None


def empirical_mean(stats: ArmStatistics, arm: int) -> float:
    """Mean reward of one arm, 0 when it has never been pulled."""
    t = int(stats.pulls[arm])
    return float(stats.reward_sum[arm]) / t if t > 0 else 0.0


def empirical_means(stats: ArmStatistics) -> np.ndarray:
    out = np.zeros(stats.num_arms)
    pulled = stats.pulls > 0
    out[pulled] = stats.reward_sum[pulled] / stats.pulls[pulled]
    return out


def _pick_tied(candidates: np.ndarray, rng: np.random.Generator) -> int:
    # one uniform, consumed only on a real tie; clamp guards u ~ 1.0
    n = candidates.size
    if n == 1:
        return int(candidates[0])
    k = int(rng.random() * n)
    if k >= n:
        k = n - 1
    return int(candidates[k])


def argmax_random_tie(values: np.ndarray, rng: np.random.Generator) -> int:
    v = np.asarray(values)
    return _pick_tied(np.flatnonzero(v == v.max()), rng)


def select_leader(stats: ArmStatistics, rng: np.random.Generator) -> int:
    """Arm with the highest empirical mean, uniform over ties.

    Unpulled arms count as mean 0, so at the very first round the leader is
    uniform over all arms.
    """
    return argmax_random_tie(empirical_means(stats), rng)


def exploration_rate(round_index: int, c: float = DEFAULT_KLUCB_C) -> float:
    """KL-UCB exploration budget f(t) = log t + c log(max(log t, 1))."""
    if round_index < 1:
        raise ValueError("round_index must be >= 1")
    lt = math.log(round_index)
    return lt + c * math.log(lt if lt > 1.0 else 1.0)


def uts_step(stats: ArmStatistics, graph: UmabGraph, rng: np.random.Generator) -> PolicyDecision:
    """One round of unimodal Thompson sampling.

    Elects the empirical leader l, then restricts attention to its closed
    neighborhood. Every |N+(l)|-th round that l spends as leader is a forced
    exploitation pull of l itself; otherwise each arm in N+(l) gets a
    Beta(1 + S, 1 + T - S) posterior draw (ascending arm order) and the
    highest draw is pulled. The forced pulls keep the leader's count growing
    linearly, which is what lets a wrong leader be dethroned quickly.
    """
    leader = select_leader(stats, rng)
    nplus = graph.closed_neighborhood(leader)
    if int(stats.leader_count[leader]) % len(nplus) == 0:
        return PolicyDecision(chosen_arm=leader, leader=leader)
    thetas = np.empty(len(nplus))
    for k, arm in enumerate(nplus):
        s = float(stats.reward_sum[arm])
        t = int(stats.pulls[arm])
        thetas[k] = rng.beta(1.0 + s, 1.0 + t - s)
    pick = argmax_random_tie(thetas, rng)
    return PolicyDecision(chosen_arm=int(nplus[pick]), leader=leader)


def ts_step(stats: ArmStatistics, rng: np.random.Generator) -> PolicyDecision:
    """Plain Thompson sampling over all arms, ignoring the graph."""
    thetas = np.empty(stats.num_arms)
    for arm in range(stats.num_arms):
        s = float(stats.reward_sum[arm])
        t = int(stats.pulls[arm])
        thetas[arm] = rng.beta(1.0 + s, 1.0 + t - s)
    return PolicyDecision(chosen_arm=argmax_random_tie(thetas, rng))


def klucb_step(
    stats: ArmStatistics,
    round_index: int,
    c: float = DEFAULT_KLUCB_C,
) -> PolicyDecision:
    """KL-UCB over all arms.

    Pulls unpulled arms first in ascending index order; afterwards pulls the
    arm maximizing the KL-UCB index at budget f(round_index). Index ties go
    to the lowest arm. Consumes no randomness.
    """
    unpulled = np.flatnonzero(stats.pulls == 0)
    if unpulled.size:
        return PolicyDecision(chosen_arm=int(unpulled[0]))
    budget = exploration_rate(round_index, c)
    best_arm = 0
    best_val = -1.0
    for arm in range(stats.num_arms):
        val = klucb_index(empirical_mean(stats, arm), int(stats.pulls[arm]), budget)
        if val > best_val:
            best_val = val
            best_arm = arm
    return PolicyDecision(chosen_arm=best_arm)


def osub_step(
    stats: ArmStatistics,
    graph: UmabGraph,
    max_degree: int,
    rng: np.random.Generator,
    c: float = DEFAULT_KLUCB_C,
) -> PolicyDecision:
    """Optimal sampling for unimodal bandits (index form).

    Elects the leader as in `uts_step`. Every (gamma + 1)-th leader round,
    with gamma the maximum degree of the whole graph, is a forced pull of
    the leader. Otherwise each arm in N+(l) is scored with a KL-UCB index
    driven by the leader's own clock, budget f(L_l), and the best index is
    pulled (never-pulled arms score 1.0, ties to the lowest arm).
    """
    leader = select_leader(stats, rng)
    if int(stats.leader_count[leader]) % (max_degree + 1) == 0:
        return PolicyDecision(chosen_arm=leader, leader=leader)
    budget = exploration_rate(int(stats.leader_count[leader]), c)
    best_arm = leader
    best_val = -1.0
    for arm in graph.closed_neighborhood(leader):
        if int(stats.pulls[arm]) == 0:
            val = 1.0
        else:
            val = klucb_index(empirical_mean(stats, arm), int(stats.pulls[arm]), budget)
        if val > best_val:
            best_val = val
            best_arm = arm
    return PolicyDecision(chosen_arm=best_arm, leader=leader)


def update(stats: ArmStatistics, decision: PolicyDecision, reward) -> None:
    """Apply one observed reward; increments the leader clock if any."""
    if reward != 0 and reward != 1:
        raise ValueError(f"reward must be 0 or 1, got {reward!r}")
    stats.reward_sum[decision.chosen_arm] += reward
    stats.pulls[decision.chosen_arm] += 1
    if decision.leader is not None:
        stats.leader_count[decision.leader] += 1


class Policy:
    """Stepping interface shared by all policies.

    `kernel_id` identifies the compiled implementation of the same policy
    (None means pure-Python only).
    """

    name: str = "?"
    kernel_id: int | None = None

    def step(
        self,
        stats: ArmStatistics,
        round_index: int,
        rng: np.random.Generator,
    ) -> PolicyDecision:
        raise NotImplementedError


class UtsPolicy(Policy):
    name = "uts"
    kernel_id = 0

    def __init__(self, graph: UmabGraph):
        self.graph = graph

    def step(self, stats, round_index, rng):
        return uts_step(stats, self.graph, rng)


class TsPolicy(Policy):
    name = "ts"
    kernel_id = 1

    def step(self, stats, round_index, rng):
        return ts_step(stats, rng)


class KlucbPolicy(Policy):
    name = "klucb"
    kernel_id = 2

    def __init__(self, c: float = DEFAULT_KLUCB_C):
        self.c = float(c)

    def step(self, stats, round_index, rng):
        return klucb_step(stats, round_index, self.c)


class OsubPolicy(Policy):
    name = "osub"
    kernel_id = 3

    def __init__(self, graph: UmabGraph, c: float = DEFAULT_KLUCB_C):
        self.graph = graph
        self.max_degree = graph.max_degree
        self.c = float(c)

    def step(self, stats, round_index, rng):
        return osub_step(stats, self.graph, self.max_degree, rng, self.c)


class UniformPolicy(Policy):
    """Uniform-random arm each round; linear-regret control for diagnostics."""

    name = "uniform"
    kernel_id = 4

    def step(self, stats, round_index, rng):
        n = stats.num_arms
        k = int(rng.random() * n)
        if k >= n:
            k = n - 1
        return PolicyDecision(chosen_arm=k)


class FixedArmPolicy(Policy):
    """Always pulls one arm; zero-regret oracle when given the optimum."""

    name = "fixed"
    kernel_id = None

    def __init__(self, arm: int):
        self.arm = int(arm)

    def step(self, stats, round_index, rng):
        return PolicyDecision(chosen_arm=self.arm)


@dataclass(frozen=True)
class PolicyConfig:
    """Declarative policy choice as it appears in experiment configs."""

    name: str
    klucb_c: float = DEFAULT_KLUCB_C
    label: str | None = None

    def __post_init__(self) -> None:
        if self.name not in POLICY_NAMES:
            raise ValueError(f"unknown policy {self.name!r}, expected one of {POLICY_NAMES}")

    @property
    def output_label(self) -> str:
        if self.label is not None:
            return self.label
        if self.name in ("klucb", "osub") and self.klucb_c != DEFAULT_KLUCB_C:
            return f"{self.name}_c{self.klucb_c:g}"
        return self.name


def make_policy(config: PolicyConfig, env: BernoulliEnvironment) -> Policy:
    if config.name == "uts":
        return UtsPolicy(env.graph)
    if config.name == "ts":
        return TsPolicy()
    if config.name == "klucb":
        return KlucbPolicy(config.klucb_c)
    if config.name == "osub":
        return OsubPolicy(env.graph, config.klucb_c)
    if config.name == "uniform":
        return UniformPolicy()
    raise ValueError(f"unknown policy {config.name!r}")
