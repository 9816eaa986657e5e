"""Test arrivals and the hour-by-hour simulator."""

import numpy as np
import pytest

from geo_carbon_scheduler.engine.arrivals import ARRIVAL_MEAN_RATIO, generate_arrivals
from geo_carbon_scheduler.engine.policies import parse_policy
from geo_carbon_scheduler.engine.simulator import (
    SimConfig,
    SimState,
    run_hour,
    run_simulation,
    weighted_percentile,
)
from geo_carbon_scheduler.utils.config import apply_overrides, load_run_config
from geo_carbon_scheduler.utils.errors import InvalidParam, TraceExhausted
from geo_carbon_scheduler.utils.trace_loader import load_bundle


def load(config_path, **overrides):
    """Run config and trace bundle for a written trace set."""
    config = apply_overrides(load_run_config(str(config_path)), overrides)
    bundle = load_bundle(config.regions, config.latency, config.carbon, config.workload)
    return config, bundle


def simulate(config_path, policy, **overrides):
    config, bundle = load(config_path, **overrides)
    spec = parse_policy(
        policy, alpha=config.alpha, capacity=config.capacity, max_servers=config.max_servers
    )
    return run_simulation(SimConfig.from_run_config(config, spec, bundle), bundle), bundle


class TestArrivals:
    """Test truncated-exponential arrival generation."""

    def test_zero_rate(self):
        """Test a zero rate produces no requests."""
        counts = generate_arrivals(0, 60, np.random.default_rng(0))
        assert counts.tolist() == [0] * 60

    def test_truncated(self):
        """Test no timestep exceeds 1.5x the per-timestep mean for any of 10,000 seeds."""
        for seed in range(10_000):
            counts = generate_arrivals(6000, 60, np.random.default_rng(seed))
            assert counts.dtype == np.int64
            assert 0 <= counts.min() and counts.max() <= 150, seed

    def test_mean_ratio(self):
        """Test the long-run mean matches the truncated mean."""
        counts = generate_arrivals(600_000, 10_000, np.random.default_rng(5))
        assert counts.mean() == pytest.approx(60 * ARRIVAL_MEAN_RATIO, rel=0.03)
        assert ARRIVAL_MEAN_RATIO == pytest.approx(0.5692, abs=1e-4)

    def test_deterministic(self):
        """Test the same seed gives the same counts."""
        first = generate_arrivals(1234, 12, np.random.default_rng(8))
        second = generate_arrivals(1234, 12, np.random.default_rng(8))
        np.testing.assert_array_equal(first, second)

    def test_invalid_arguments(self):
        """Test negative rates and empty hours are rejected."""
        with pytest.raises(ValueError):
            generate_arrivals(-1, 60, np.random.default_rng(0))
        with pytest.raises(ValueError):
            generate_arrivals(10, 0, np.random.default_rng(0))


class TestWeightedPercentile:
    """Test the nearest-rank percentile over request counts."""

    def test_nearest_rank(self):
        """Test the 95th request lands in the middle value."""
        assert weighted_percentile([10, 20, 30], [90, 5, 5]) == 20

    def test_unsorted_values(self):
        """Test values need not be sorted."""
        assert weighted_percentile([30, 10, 20], [5, 90, 5], 0.5) == 10

    def test_empty(self):
        """Test zero requests give zero."""
        assert weighted_percentile([10, 20], [0, 0]) == 0.0


class TestSimConfig:
    """Test simulation settings."""

    def test_invalid_hours(self):
        """Test negative hours are InvalidParam."""
        with pytest.raises(InvalidParam):
            SimConfig(policy=parse_policy("latency"), hours=-1)

    def test_whole_trace_by_default(self, two_region_config):
        """Test hours defaults to the rest of the trace."""
        config, bundle = load(two_region_config, start_hour=4)
        sim = SimConfig.from_run_config(config, parse_policy("latency"), bundle)
        assert sim.hours == 20
        assert sim.timesteps_per_hour == 12
        assert sim.num_buckets == 6


class TestSimulation:
    """Test simulated hours."""

    def test_single_region_serves_locally(self, tmp_path, trace_set_factory):
        """Test one region serves everything it originates."""
        path = trace_set_factory(
            tmp_path,
            ["solo"],
            [[3]],
            carbon={"solo": [100.0] * 3},
            workload={"solo": [0.5] * 3},
            timesteps_per_hour=6,
        )
        result, _ = simulate(path, "carbon-20")

        for report in result.reports:
            stats = report.regions[0]
            assert report.arc_counts == [[stats.originated]]
            assert stats.served == stats.originated
            assert report.mean_latency_ms == (3.0 if stats.originated else 0.0)

    def test_carbon_policy_redirects_to_green(self, two_region_config):
        """Test nearly all dirty-region traffic is served by the green region."""
        result, _ = simulate(two_region_config, "carbon-20", hours=6)

        redirected = np.array(result.summary.redirections)
        assert redirected[0, 1] >= 0.95 * redirected[0].sum()
        assert result.summary.total_overloads == 0

    def test_baseline_serves_locally(self, two_region_config):
        """Test the latency baseline never leaves the origin."""
        result, _ = simulate(two_region_config, "latency", hours=6)

        redirected = np.array(result.summary.redirections)
        assert redirected[0, 1] == 0
        assert redirected[1, 0] == 0
        assert result.summary.mean_latency_ms == 1.0
        assert result.summary.total_spillovers == 0

    def test_conservation_and_capacity(self, two_region_config):
        """Test every request is served once and planned capacity is respected."""
        result, bundle = simulate(two_region_config, "carbon-20", hours=6)

        for report in result.reports:
            assert report.total_served == report.total_originated
            assert np.array(report.arc_counts).sum() == report.total_originated
            assert np.array(report.bucket_served).sum() == report.total_originated
            for i, stats in enumerate(report.regions):
                capacity = stats.servers * 100
                assert stats.served - stats.overloads <= capacity
                assert sum(row[i] for row in report.arc_counts) == stats.served

    def test_emissions_identity(self, two_region_config):
        """Test emissions are served requests times actual intensity times energy."""
        result, bundle = simulate(two_region_config, "carbon-20", hours=4)

        for report in result.reports:
            intensity = bundle.carbon.at(report.hour)
            for i, stats in enumerate(report.regions):
                assert stats.emissions_g == pytest.approx(stats.served * intensity[i] * 1e-4)
        assert result.summary.total_emissions_g == pytest.approx(
            sum(r.total_emissions_g for r in result.reports)
        )

    def test_same_arrivals_across_policies(self, two_region_config):
        """Test policies see identical request counts for a seed."""
        baseline, _ = simulate(two_region_config, "latency", hours=5)
        carbon, _ = simulate(two_region_config, "carbon-20", hours=5)

        for a, b in zip(baseline.reports, carbon.reports):
            assert [r.originated for r in a.regions] == [r.originated for r in b.regions]

    def test_deterministic(self, two_region_config):
        """Test identical inputs and seed give identical results."""
        first, _ = simulate(two_region_config, "carbon-20", hours=3, seed=11)
        second, _ = simulate(two_region_config, "carbon-20", hours=3, seed=11)
        assert first.model_dump() == second.model_dump()

    def test_zero_hours(self, two_region_config):
        """Test an empty run reports zero totals."""
        result, _ = simulate(two_region_config, "carbon-20", hours=0)

        assert result.reports == []
        assert result.summary.hours == 0
        assert result.summary.total_emissions_g == 0.0
        assert result.summary.mean_latency_ms == 0.0

    def test_trace_exhausted(self, two_region_config):
        """Test hours past the trace end fail."""
        config, bundle = load(two_region_config)
        sim = SimConfig(policy=parse_policy("carbon-20"), hours=30, timesteps_per_hour=4)

        with pytest.raises(TraceExhausted):
            run_simulation(sim, bundle)

    def test_single_hour_forecast_errors(self, two_region_config):
        """Test the oracle forecaster records zero error."""
        config, bundle = load(two_region_config)
        sim = SimConfig.from_run_config(config, parse_policy("carbon-20"), bundle)
        state = SimState(config.seed)

        report = run_hour(0, bundle, sim, state)
        assert report.hour == 0
        assert state.carbon_errors == [0.0, 0.0]
        assert state.workload_errors == [0.0, 0.0]
