"""Tests for seeding, trial/ensemble runners, summaries, and diagnostics."""

import numpy as np
import pytest

from umabsim._backend import available_backends, resolve_backend
from umabsim.environments import build_line_graph
from umabsim.policies import FixedArmPolicy, PolicyConfig, TsPolicy, UniformPolicy, UtsPolicy
from umabsim.simulator import (
    GRAPH_STREAM,
    TRIAL_STREAM,
    EnsembleSummary,
    EnvironmentSpec,
    checkpoint_grid,
    closed_neighborhood_csr,
    derive_seed,
    log_slope_check,
    read_summary_csv,
    regret_ratio,
    run_ensemble,
    run_trial,
    write_summary_csv,
)

HAS_COMPILED = "compiled" in available_backends()


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(42, TRIAL_STREAM, 0, 3) == derive_seed(42, TRIAL_STREAM, 0, 3)

    def test_distinct_across_streams_and_indices(self):
        seeds = {
            derive_seed(42, GRAPH_STREAM, 0),
            derive_seed(42, TRIAL_STREAM, 0),
            derive_seed(42, TRIAL_STREAM, 1),
            derive_seed(42, TRIAL_STREAM, 0, 0),
            derive_seed(42, TRIAL_STREAM, 0, 1),
            derive_seed(43, TRIAL_STREAM, 0, 0),
        }
        assert len(seeds) == 6

    def test_fits_in_uint64(self):
        s = derive_seed(2**32, TRIAL_STREAM, 7, 11)
        assert 0 <= s < 2**64

    def test_rejects_negative_base(self):
        with pytest.raises(ValueError):
            derive_seed(-1, 0)


class TestCheckpointGrid:
    def test_spans_one_to_horizon(self):
        grid = checkpoint_grid(100_000, 200)
        assert grid[0] == 1
        assert grid[-1] == 100_000
        assert np.all(np.diff(grid) > 0)
        assert grid.shape[0] <= 200

    def test_small_horizon_collapses_duplicates(self):
        grid = checkpoint_grid(10, 200)
        assert grid.tolist() == list(range(1, 11))

    def test_horizon_one(self):
        assert checkpoint_grid(1, 50).tolist() == [1]

    def test_validation(self):
        with pytest.raises(ValueError):
            checkpoint_grid(0)
        with pytest.raises(ValueError):
            checkpoint_grid(10, 0)


class TestRunTrial:
    def setup_method(self):
        self.env = build_line_graph(5)

    def test_trace_shape_and_monotone_regret(self):
        trace = run_trial(self.env, TsPolicy(), 200, seed=9)
        assert trace.cumulative_regret.shape == (200,)
        assert np.all(np.diff(trace.cumulative_regret) >= 0)
        assert trace.pulls.sum() == 200

    def test_fixed_optimal_arm_has_zero_regret(self):
        arm = self.env.optimal_index
        trace = run_trial(self.env, FixedArmPolicy(arm), 100, seed=1)
        assert trace.final_regret == 0.0

    def test_fixed_suboptimal_arm_has_exact_linear_regret(self):
        gap = float(self.env.means.max() - self.env.means[0])
        trace = run_trial(self.env, FixedArmPolicy(0), 50, seed=1)
        assert trace.final_regret == pytest.approx(50 * gap, rel=1e-12)

    def test_same_seed_same_trace(self):
        a = run_trial(self.env, UtsPolicy(self.env.graph), 500, seed=77)
        b = run_trial(self.env, UtsPolicy(self.env.graph), 500, seed=77)
        assert np.array_equal(a.cumulative_regret, b.cumulative_regret)
        assert np.array_equal(a.pulls, b.pulls)

    def test_different_seeds_differ(self):
        a = run_trial(self.env, TsPolicy(), 500, seed=1)
        b = run_trial(self.env, TsPolicy(), 500, seed=2)
        assert not np.array_equal(a.cumulative_regret, b.cumulative_regret)

    def test_validation(self):
        with pytest.raises(ValueError):
            run_trial(self.env, TsPolicy(), 0, seed=1)
        with pytest.raises(ValueError):
            run_trial(self.env, TsPolicy(), 10, seed=-1)
        with pytest.raises(ValueError):
            run_trial(self.env, TsPolicy(), 10, seed=2**64)

    @pytest.mark.skipif(not HAS_COMPILED, reason="compiled backend unavailable")
    def test_backends_agree_bit_for_bit(self):
        for policy in (
            UtsPolicy(self.env.graph),
            TsPolicy(),
            UniformPolicy(),
        ):
            py = run_trial(self.env, policy, 800, seed=13, backend="python")
            cy = run_trial(self.env, policy, 800, seed=13, backend="compiled")
            assert np.array_equal(py.cumulative_regret, cy.cumulative_regret), policy.name
            assert np.array_equal(py.pulls, cy.pulls), policy.name
            assert np.array_equal(py.leader_count, cy.leader_count), policy.name

    def test_resolve_backend_rejects_unknown(self):
        with pytest.raises(ValueError):
            resolve_backend("fortran")


class TestRunEnsemble:
    def setup_method(self):
        self.env = build_line_graph(5)

    def test_summary_matches_manual_aggregation(self):
        horizon, n = 300, 8
        summary = run_ensemble(self.env, "ts", horizon, n, base_seed=5, num_checkpoints=20)
        grid = checkpoint_grid(horizon, 20)
        finals = np.array(
            [
                run_trial(self.env, TsPolicy(), horizon, derive_seed(5, TRIAL_STREAM, 0, j)).final_regret
                for j in range(n)
            ]
        )
        assert summary.num_trials == n
        assert np.array_equal(summary.checkpoints, grid)
        assert summary.final_regret == pytest.approx(finals.mean(), rel=1e-12)
        expected_hw = 1.96 * finals.std(ddof=1) / np.sqrt(n)
        assert float(summary.half_width_95[-1]) == pytest.approx(expected_hw, rel=1e-12)

    def test_single_trial_has_zero_half_width(self):
        summary = run_ensemble(self.env, "ts", 100, 1, base_seed=5)
        assert not summary.half_width_95.any()

    def test_worker_count_does_not_change_result(self):
        kw = dict(horizon=400, num_trials=6, base_seed=21, num_checkpoints=15)
        serial = run_ensemble(self.env, "uts", **kw, workers=1)
        threaded = run_ensemble(self.env, "uts", **kw, workers=4)
        assert np.array_equal(serial.mean_regret, threaded.mean_regret)
        assert np.array_equal(serial.half_width_95, threaded.half_width_95)

    def test_accepts_spec_env_and_list(self):
        spec = EnvironmentSpec(kind="line", num_arms=5)
        kw = dict(horizon=150, num_trials=3, base_seed=2, num_checkpoints=10)
        from_spec = run_ensemble(spec, "ts", **kw)
        from_env = run_ensemble(self.env, "ts", **kw)
        from_list = run_ensemble([self.env], "ts", **kw)
        assert np.array_equal(from_spec.mean_regret, from_env.mean_regret)
        assert np.array_equal(from_env.mean_regret, from_list.mean_regret)

    def test_policy_config_and_name_agree(self):
        kw = dict(horizon=150, num_trials=3, base_seed=2, num_checkpoints=10)
        by_name = run_ensemble(self.env, "uts", **kw)
        by_config = run_ensemble(self.env, PolicyConfig("uts"), **kw)
        assert np.array_equal(by_name.mean_regret, by_config.mean_regret)

    def test_multi_graph_spec_runs_trials_per_graph(self):
        spec = EnvironmentSpec(kind="erdos_renyi", num_arms=6, edge_prob=0.5, num_graphs=3)
        summary = run_ensemble(spec, "ts", horizon=100, num_trials=2, base_seed=3, num_checkpoints=8)
        assert summary.num_trials == 6

    def test_validation(self):
        with pytest.raises(ValueError):
            run_ensemble(self.env, "ts", 100, 0, base_seed=1)
        with pytest.raises(ValueError):
            run_ensemble(self.env, "ts", 100, 1, base_seed=1, workers=0)
        with pytest.raises(ValueError):
            run_ensemble([], "ts", 100, 1, base_seed=1)
        with pytest.raises(TypeError):
            run_ensemble(self.env, 42, 100, 1, base_seed=1)


def make_summary(checkpoints, means, hws=None, num_trials=10):
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    means = np.asarray(means, dtype=np.float64)
    hws = np.zeros_like(means) if hws is None else np.asarray(hws, dtype=np.float64)
    return EnsembleSummary(
        checkpoints=checkpoints, mean_regret=means, half_width_95=hws, num_trials=num_trials
    )


class TestRegretRatio:
    def test_value_and_delta_method_half_width(self):
        a = make_summary([1, 10, 100], [1.0, 5.0, 20.0], [0.0, 0.0, 2.0])
        b = make_summary([1, 10, 100], [2.0, 20.0, 40.0], [0.0, 0.0, 4.0])
        r = regret_ratio(a, b)
        assert r.value == pytest.approx(0.5)
        assert r.final_round == 100
        expected_hw = 0.5 * np.hypot(2.0 / 20.0, 4.0 / 40.0)
        assert r.half_width_95 == pytest.approx(expected_hw, rel=1e-12)

    def test_rejects_mismatched_grids(self):
        a = make_summary([1, 10], [1.0, 2.0])
        b = make_summary([1, 20], [1.0, 2.0])
        with pytest.raises(ValueError):
            regret_ratio(a, b)

    def test_rejects_nonpositive_denominator(self):
        a = make_summary([1, 10], [1.0, 2.0])
        b = make_summary([1, 10], [0.0, 0.0])
        with pytest.raises(ValueError):
            regret_ratio(a, b)


class TestLogSlopeCheck:
    def setup_method(self):
        self.env = build_line_graph(5)
        self.grid = checkpoint_grid(100_000, 60)

    def test_recovers_slope_of_exact_log_curve(self):
        means = 3.5 * np.log(self.grid.astype(float)) + 2.0
        diag = log_slope_check(make_summary(self.grid, means), self.env)
        assert diag.slope == pytest.approx(3.5, rel=1e-9)
        assert diag.finite_positive
        assert not diag.linear_trend
        assert diag.lower_bound > 0.0

    def test_flags_linear_regret(self):
        means = 0.25 * self.grid.astype(float)
        diag = log_slope_check(make_summary(self.grid, means), self.env)
        assert diag.linear_trend
        assert diag.linear_fit_sse < diag.log_fit_sse

    def test_flat_curve_is_not_positive(self):
        means = np.zeros_like(self.grid, dtype=float)
        diag = log_slope_check(make_summary(self.grid, means), self.env)
        assert not diag.finite_positive
        assert diag.slope == pytest.approx(0.0, abs=1e-12)

    def test_uniform_policy_run_shows_linear_trend(self):
        summary = run_ensemble(self.env, "uniform", 10_000, 4, base_seed=6, num_checkpoints=50)
        diag = log_slope_check(summary, self.env)
        assert diag.linear_trend

    def test_requires_long_horizon(self):
        grid = checkpoint_grid(1000, 30)
        summary = make_summary(grid, np.log(grid.astype(float)))
        with pytest.raises(ValueError):
            log_slope_check(summary, self.env)


class TestSummaryCsv:
    def test_round_trip_is_exact(self, tmp_path):
        env = build_line_graph(5)
        summary = run_ensemble(env, "ts", 500, 5, base_seed=8, num_checkpoints=25)
        path = tmp_path / "summary.csv"
        write_summary_csv(summary, path)
        back = read_summary_csv(path)
        assert np.array_equal(back.checkpoints, summary.checkpoints)
        assert np.array_equal(back.mean_regret, summary.mean_regret)
        assert np.array_equal(back.half_width_95, summary.half_width_95)
        assert back.num_trials == 0

    def test_identical_runs_write_identical_bytes(self, tmp_path):
        env = build_line_graph(5)
        kw = dict(horizon=300, num_trials=4, base_seed=3, num_checkpoints=20)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_summary_csv(run_ensemble(env, "uts", **kw), p1)
        write_summary_csv(run_ensemble(env, "uts", **kw), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,value\n1,2\n")
        with pytest.raises(ValueError):
            read_summary_csv(path)

    def test_rejects_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("round,mean_regret,half_width_95\n")
        with pytest.raises(ValueError):
            read_summary_csv(path)


class TestEnvironmentSpec:
    def test_line_build_is_deterministic_and_ignores_seed(self):
        spec = EnvironmentSpec(kind="line", num_arms=17)
        a, b = spec.build(base_seed=1), spec.build(base_seed=999)
        assert np.array_equal(a.means, b.means)
        assert a.graph == b.graph

    def test_er_build_depends_on_graph_index_not_call_order(self):
        spec = EnvironmentSpec(kind="erdos_renyi", num_arms=8, edge_prob=0.5, num_graphs=3)
        first = [spec.build(7, k) for k in range(3)]
        again = [spec.build(7, k) for k in (2, 0, 1)]
        assert first[2].graph == again[0].graph
        assert np.array_equal(first[0].means, again[1].means)
        assert first[0].graph != first[1].graph or not np.array_equal(
            first[0].means, first[1].means
        )

    def test_line_distance_builds_path_topology(self):
        spec = EnvironmentSpec(kind="line_distance", num_arms=9)
        env = spec.build(base_seed=4)
        assert env.graph.max_degree == 2
        assert env.graph.num_edges == 8
        assert env.means.max() == pytest.approx(0.9)

    def test_build_all_length(self):
        spec = EnvironmentSpec(kind="erdos_renyi", num_arms=6, edge_prob=0.6, num_graphs=4)
        assert len(spec.build_all(base_seed=11)) == 4

    def test_output_labels(self):
        assert EnvironmentSpec(kind="line", num_arms=17).output_label == "line17"
        assert EnvironmentSpec(kind="line_distance", num_arms=9).output_label == "linedist9"
        assert (
            EnvironmentSpec(kind="erdos_renyi", num_arms=10, edge_prob=0.25).output_label
            == "er10_p0.25"
        )
        assert (
            EnvironmentSpec(kind="line", num_arms=5, label="custom").output_label == "custom"
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            EnvironmentSpec(kind="ring", num_arms=5)
        with pytest.raises(ValueError):
            EnvironmentSpec(kind="line", num_arms=0)
        with pytest.raises(ValueError):
            EnvironmentSpec(kind="line", num_arms=5, num_graphs=2)
        with pytest.raises(ValueError):
            EnvironmentSpec(kind="erdos_renyi", num_arms=5)
        with pytest.raises(ValueError):
            EnvironmentSpec(kind="erdos_renyi", num_arms=5, edge_prob=1.5)
        with pytest.raises(ValueError):
            EnvironmentSpec(kind="file")
        with pytest.raises(ValueError):
            EnvironmentSpec(kind="line", num_arms=5, mu_min=0.9, mu_max=0.1)

    def test_build_rejects_out_of_range_graph_index(self):
        spec = EnvironmentSpec(kind="line", num_arms=5)
        with pytest.raises(ValueError):
            spec.build(base_seed=1, graph_index=1)

    def test_file_round_trip(self, tmp_path):
        from umabsim.environments import save_environment

        env = build_line_graph(7)
        path = tmp_path / "env.json"
        save_environment(env, path)
        spec = EnvironmentSpec(kind="file", path=str(path))
        loaded = spec.build(base_seed=0)
        assert np.array_equal(loaded.means, env.means)
        assert loaded.graph == env.graph
        assert spec.output_label == "env"


class TestClosedNeighborhoodCsr:
    def test_line_graph_rows(self):
        graph = build_line_graph(5).graph
        indptr, indices = closed_neighborhood_csr(graph)
        assert indptr.tolist() == [0, 2, 5, 8, 11, 13]
        assert indices.tolist() == [0, 1, 0, 1, 2, 1, 2, 3, 2, 3, 4, 3, 4]
