#!/usr/bin/env python3
"""Time the compiled trial kernel against the pure-Python loop.

Runs every policy on a triangular-line instance with both backends,
checks that the two produce bit-identical regret curves (they walk the
same random stream), and prints per-trial timings with the speedup.

Usage:
    python3 benchmarks/bench_backends.py [--horizon N] [--trials N]
                                         [--arms K] [--seed S]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from umabsim import _backend
from umabsim.environments import build_line_graph
from umabsim.policies import PolicyConfig, make_policy
from umabsim.simulator import derive_seed, run_trial

POLICIES = ("uts", "ts", "klucb", "osub", "uniform")


def time_backend(env, name: str, horizon: int, seeds, backend: str) -> float:
    """Total wall-clock seconds to run one trial per seed."""
    total = 0.0
    for seed in seeds:
        policy = make_policy(PolicyConfig(name), env)
        start = time.perf_counter()
        run_trial(env, policy, horizon, seed, backend=backend)
        total += time.perf_counter() - start
    return total


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--horizon", type=int, default=20_000, help="rounds per trial")
    parser.add_argument("--trials", type=int, default=3, help="trials per measurement")
    parser.add_argument("--arms", type=int, default=17, help="line-graph size")
    parser.add_argument("--seed", type=int, default=20240017, help="base seed")
    args = parser.parse_args(argv)

    if "compiled" not in _backend.available_backends():
        parser.exit(1, "compiled kernels are not available; build the extension first\n")

    env = build_line_graph(args.arms)
    seeds = [derive_seed(args.seed, 1, 0, j) for j in range(args.trials)]

    print(
        f"line graph K={args.arms}, horizon={args.horizon}, "
        f"{args.trials} trial(s) per cell\n"
    )
    header = f"{'policy':<9}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name in POLICIES:
        cfg = PolicyConfig(name)
        a = run_trial(env, make_policy(cfg, env), args.horizon, seeds[0], backend="python")
        b = run_trial(env, make_policy(cfg, env), args.horizon, seeds[0], backend="compiled")
        if not np.array_equal(a.cumulative_regret, b.cumulative_regret):
            raise AssertionError(f"{name}: backends disagree at seed {seeds[0]}")
        t_py = time_backend(env, name, args.horizon, seeds, "python")
        t_c = time_backend(env, name, args.horizon, seeds, "compiled")
        per_py = t_py / args.trials * 1e3
        per_c = t_c / args.trials * 1e3
        print(f"{name:<9}{per_py:>10.1f}ms{per_c:>10.2f}ms{t_py / t_c:>9.1f}x")
    print("\nregret curves bit-identical across backends for every policy")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
