"""Graph-structured Bernoulli bandit environments.

An environment is an undirected connected graph over arms plus a vector of
Bernoulli means. Builders cover two families: line graphs with triangular
mean profiles, and connected Erdos-Renyi graphs with means assigned by hop
distance from a randomly placed optimum. Environments serialize to JSON
with 1-based arm indices so instances can be pinned and replayed exactly.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_MU_MAX = 0.9
DEFAULT_MU_MIN = 0.1


@dataclass(frozen=True)
class UmabGraph:
    """Undirected connected graph with per-node sorted neighbor lists."""

    num_arms: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.num_arms < 1:
            raise ValueError("num_arms must be >= 1")
        if len(self.neighbors) != self.num_arms:
            raise ValueError("neighbor table size must equal num_arms")
        for i, nbrs in enumerate(self.neighbors):
            if len(set(nbrs)) != len(nbrs):
                raise ValueError(f"duplicate neighbor at node {i}")
            if tuple(sorted(nbrs)) != tuple(nbrs):
                raise ValueError(f"neighbors of node {i} must be sorted")
            for j in nbrs:
                if not 0 <= j < self.num_arms:
                    raise ValueError(f"neighbor {j} of node {i} out of range")
                if j == i:
                    raise ValueError(f"self-loop at node {i}")
                if i not in self.neighbors[j]:
                    raise ValueError(f"edge ({i}, {j}) is not symmetric")
        if not self._connected():
            raise ValueError("graph must be connected")

    def _connected(self) -> bool:
        seen = np.zeros(self.num_arms, dtype=bool)
        queue = deque([0])
        seen[0] = True
        while queue:
            i = queue.popleft()
            for j in self.neighbors[i]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        return bool(seen.all())

    @staticmethod
    def from_edges(num_arms: int, edges) -> "UmabGraph":
        """Build from an iterable of 0-based (i, j) pairs."""
        adj: list[set[int]] = [set() for _ in range(num_arms)]
        seen: set[tuple[int, int]] = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if not (0 <= i < num_arms and 0 <= j < num_arms):
                raise ValueError(f"edge ({i}, {j}) out of range")
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add(key)
            adj[i].add(j)
            adj[j].add(i)
        return UmabGraph(num_arms, tuple(tuple(sorted(s)) for s in adj))

    @property
    def num_edges(self) -> int:
        return sum(len(n) for n in self.neighbors) // 2

    @property
    def max_degree(self) -> int:
        return max(len(n) for n in self.neighbors)

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def neighborhood(self, i: int) -> tuple[int, ...]:
        """Open neighborhood N(i), ascending."""
        return self.neighbors[i]

    def closed_neighborhood(self, i: int) -> tuple[int, ...]:
        """N(i) plus i itself, ascending."""
        merged = sorted(self.neighbors[i] + (i,))
        return tuple(merged)

    def edge_list(self) -> list[tuple[int, int]]:
        """All edges as (i, j) with i < j, lexicographically sorted."""
        return [(i, j) for i in range(self.num_arms) for j in self.neighbors[i] if i < j]


def shortest_path_distances(graph: UmabGraph, source: int) -> np.ndarray:
    """Hop distance from `source` to every node (BFS)."""
    dist = np.full(graph.num_arms, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        i = queue.popleft()
        for j in graph.neighbors[i]:
            if dist[j] < 0:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def verify_unimodal(graph: UmabGraph, means) -> bool:
    """True when the mean vector is unimodal on the graph.

    Requires a unique global maximum and, from every other node, at least
    one neighbor with a strictly larger mean, so greedy ascent from any
    node reaches the optimum.
    """
    mu = np.asarray(means, dtype=np.float64)
    if mu.shape != (graph.num_arms,):
        raise ValueError("means length must equal num_arms")
    top = mu.max()
    if int((mu == top).sum()) != 1:
        return False
    star = int(mu.argmax())
    for i in range(graph.num_arms):
        if i == star:
            continue
        if not any(mu[j] > mu[i] for j in graph.neighbors[i]):
            return False
    return True


@dataclass(frozen=True)
class BernoulliEnvironment:
    """Arm graph, Bernoulli means, and the index of the best arm.

    `seed` records the 64-bit value used to generate the instance (0 for
    deterministic constructions) so a saved environment can be traced back
    to its generator inputs. Unimodality is a property of the instance,
    checked by `verify_unimodal`, not a requirement of the container.
    """

    graph: UmabGraph
    means: np.ndarray = field(repr=False)
    optimal_index: int
    seed: int = 0

    def __post_init__(self) -> None:
        mu = np.ascontiguousarray(self.means, dtype=np.float64)
        mu.setflags(write=False)
        object.__setattr__(self, "means", mu)
        if mu.shape != (self.graph.num_arms,):
            raise ValueError("means length must equal num_arms")
        if mu.min() < 0.0 or mu.max() > 1.0:
            raise ValueError("means must lie in [0, 1]")
        if not 0 <= self.optimal_index < self.graph.num_arms:
            raise ValueError("optimal_index out of range")
        if mu[self.optimal_index] != mu.max():
            raise ValueError("optimal_index must attain the maximum mean")

    @property
    def num_arms(self) -> int:
        return self.graph.num_arms


def draw_reward(env: BernoulliEnvironment, arm: int, rng: np.random.Generator) -> int:
    """One Bernoulli(means[arm]) sample; consumes exactly one uniform."""
    return 1 if rng.random() < env.means[arm] else 0


def path_graph(num_arms: int) -> UmabGraph:
    """Path topology 0 - 1 - ... - (num_arms - 1)."""
    return UmabGraph.from_edges(num_arms, [(i, i + 1) for i in range(num_arms - 1)])


def build_line_graph(
    num_arms: int,
    mu_min: float = DEFAULT_MU_MIN,
    mu_max: float = DEFAULT_MU_MAX,
) -> BernoulliEnvironment:
    """Path graph with means rising linearly to a central peak.

    The optimum sits at index (num_arms - 1) // 2; means fall linearly to
    mu_min at both endpoints. Each side is generated with linspace so the
    endpoints and the peak are exact and odd-length instances are
    bit-symmetric.
    """
    if num_arms < 1:
        raise ValueError("num_arms must be >= 1")
    if not (0.0 <= mu_min < mu_max <= 1.0):
        raise ValueError("need 0 <= mu_min < mu_max <= 1")
    graph = path_graph(num_arms)
    star = (num_arms - 1) // 2
    if star == 0:
        left = np.array([mu_max])
    else:
        left = np.linspace(mu_min, mu_max, star + 1)
    right_len = num_arms - star - 1
    if right_len == star:
        right = left[-2::-1]
    else:
        right = np.linspace(mu_max, mu_min, right_len + 1)[1:]
    means = np.concatenate([left, right])
    return BernoulliEnvironment(graph=graph, means=means, optimal_index=star)


def build_er_graph(
    num_arms: int,
    edge_prob: float,
    rng: np.random.Generator,
    max_attempts: int = 1_000_000,
) -> UmabGraph:
    """Connected Erdos-Renyi graph G(num_arms, edge_prob).

    Samples every unordered pair independently and rejects the whole draw
    until the graph is connected, which keeps the distribution uniform over
    connected outcomes. Raises RuntimeError when max_attempts draws all
    fail (the expected hit rate is poor below the connectivity threshold
    log(K)/K, so a tight budget surfaces misconfiguration early).
    """
    if num_arms < 1:
        raise ValueError("num_arms must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must be in [0, 1]")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    rows, cols = np.triu_indices(num_arms, k=1)
    for _ in range(max_attempts):
        mask = rng.random(rows.shape[0]) < edge_prob
        graph_edges = list(zip(rows[mask].tolist(), cols[mask].tolist()))
        try:
            return UmabGraph.from_edges(num_arms, graph_edges)
        except ValueError:
            continue
    raise RuntimeError(
        f"no connected graph in {max_attempts} draws "
        f"(num_arms={num_arms}, edge_prob={edge_prob}); "
        "edge_prob is likely below the connectivity threshold log(K)/K"
    )


def assign_rewards_by_distance(
    graph: UmabGraph,
    rng: np.random.Generator,
    mu_min: float = DEFAULT_MU_MIN,
    mu_max: float = DEFAULT_MU_MAX,
    seed: int = 0,
) -> BernoulliEnvironment:
    """Place the optimum uniformly at random and decay means with distance.

    mu_i = mu_max - d_i * (mu_max - mu_min) / d_max where d_i is the hop
    distance from the optimum. The result is always unimodal: any neighbor
    on a shortest path is strictly closer, hence strictly better. `seed` is
    recorded on the environment for provenance.
    """
    if not (0.0 <= mu_min < mu_max <= 1.0):
        raise ValueError("need 0 <= mu_min < mu_max <= 1")
    star = int(rng.integers(graph.num_arms))
    dist = shortest_path_distances(graph, star)
    d_max = int(dist.max())
    if d_max == 0:
        means = np.full(graph.num_arms, mu_max)
    else:
        means = mu_max - dist * ((mu_max - mu_min) / d_max)
    return BernoulliEnvironment(graph=graph, means=means, optimal_index=star, seed=seed)


def env_to_dict(env: BernoulliEnvironment) -> dict:
    """JSON-ready form with 1-based arm indices."""
    return {
        "num_arms": env.num_arms,
        "edges": [[i + 1, j + 1] for i, j in env.graph.edge_list()],
        "means": [float(m) for m in env.means],
        "optimal_index": env.optimal_index + 1,
        "seed": int(env.seed),
    }


def env_from_dict(data: dict) -> BernoulliEnvironment:
    """Inverse of env_to_dict, validating structure and ranges."""
    try:
        num_arms = int(data["num_arms"])
        edges = [(int(i) - 1, int(j) - 1) for i, j in data["edges"]]
        means = np.asarray(data["means"], dtype=np.float64)
        optimal = int(data["optimal_index"]) - 1
        seed = int(data.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed environment record: {exc}") from exc
    graph = UmabGraph.from_edges(num_arms, edges)
    return BernoulliEnvironment(graph=graph, means=means, optimal_index=optimal, seed=seed)


def save_environment(env: BernoulliEnvironment, path) -> None:
    Path(path).write_text(json.dumps(env_to_dict(env), indent=2) + "\n")


def load_environment(path) -> BernoulliEnvironment:
    return env_from_dict(json.loads(Path(path).read_text()))
