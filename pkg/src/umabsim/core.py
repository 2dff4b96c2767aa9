"""Shared numerics for Bernoulli bandits.

Provides the Bernoulli KL divergence, the KL-UCB upper-confidence index
solved by bisection, Beta posterior containers and sampling, and the
asymptotic lower-bound constant of a unimodal bandit instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BISECTION_TOL = 1e-9
BISECTION_MAX_ITER = 200


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence KL(Ber(p) || Ber(q)).

    Uses the conventions 0*log(0) = 0 and KL = +inf when q is 0 or 1
    while p is not. Both arguments must lie in [0, 1]. Each log ratio is
    evaluated through log1p of the mean difference, which stays accurate
    (and in particular nonnegative) when q is close to p; the plain
    p*log(p/q) form loses all significant digits there.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    d = q - p
    if p > 0.0:
        if q == 0.0:
            return math.inf
        first = -p * math.log1p(d / p)
    else:
        first = 0.0
    if p < 1.0:
        if q == 1.0:
            return math.inf
        second = (1.0 - p) * math.log1p(d / (1.0 - q))
    else:
        second = 0.0
    total = first + second
    return total if total > 0.0 else 0.0


def klucb_index(empirical_mean: float, pulls: int, exploration_budget: float) -> float:
    """Largest q in [mean, 1] with pulls * KL(mean, q) <= budget.

    Solved by bisection on q, which is valid because KL(mean, q) is
    increasing on [mean, 1]. The returned value is the feasible lower
    bracket endpoint, so it never overshoots the budget. With a zero
    budget the index stays exactly at the empirical mean.
    """
    if pulls < 1:
        raise ValueError(f"pulls must be >= 1, got {pulls}")
    if exploration_budget < 0.0:
        raise ValueError(f"exploration_budget must be >= 0, got {exploration_budget}")
    if not 0.0 <= empirical_mean <= 1.0:
        raise ValueError(f"empirical_mean must be in [0, 1], got {empirical_mean}")
    if empirical_mean >= 1.0:
        return 1.0
    lo = empirical_mean
    hi = 1.0
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if pulls * kl_bernoulli(empirical_mean, mid) <= exploration_budget:
            lo = mid
        else:
            hi = mid
        if hi - lo < BISECTION_TOL:
            break
    return lo


@dataclass(frozen=True)
class BetaPosterior:
    """Beta(alpha, beta) posterior over a Bernoulli mean."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("Beta parameters must be positive")

    @staticmethod
    def from_counts(reward_sum: float, pulls: int) -> "BetaPosterior":
        """Posterior after `pulls` Bernoulli observations summing to
        `reward_sum`, starting from a uniform Beta(1, 1) prior."""
        if pulls < 0 or not 0.0 <= reward_sum <= pulls:
            raise ValueError(f"invalid counts: reward_sum={reward_sum}, pulls={pulls}")
        return BetaPosterior(1.0 + reward_sum, 1.0 + pulls - reward_sum)

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


def sample_beta(posterior: BetaPosterior, rng: np.random.Generator) -> float:
    """One draw from the posterior, consuming the generator's stream."""
    return float(rng.beta(posterior.alpha, posterior.beta))


def lower_bound_constant(env) -> float:
    """Asymptotic regret-rate constant of a unimodal instance.

    Sums (mu_star - mu_i) / KL(mu_i, mu_star) over the neighbors i of the
    optimal arm. Only neighbors of the optimum enter: any policy that
    exploits unimodality pays exploration only in the optimum's
    neighborhood, so this is the slope of regret against log(t).
    """
    from .environments import verify_unimodal

    if not verify_unimodal(env.graph, env.means):
        raise ValueError("environment is not unimodal on its graph")
    star = env.optimal_index
    mu_star = float(env.means[star])
    total = 0.0
    for i in env.graph.neighborhood(star):
        gap = mu_star - float(env.means[i])
        total += gap / kl_bernoulli(float(env.means[i]), mu_star)
    return total
