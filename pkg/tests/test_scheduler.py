"""Test routing weights and request dispatch."""

import numpy as np
import pytest

from geo_carbon_scheduler.engine.optimizer import solve_cap
from geo_carbon_scheduler.engine.scheduler import (
    DispatchOutcome,
    RegionLoadState,
    derive_weights,
    dispatch,
    dispatch_batch,
    spillover_order,
)
from geo_carbon_scheduler.types.models import ProvisioningPlan


def plan_of(x, s=None):
    x = np.array(x)
    return ProvisioningPlan(
        s=list(s if s is not None else [1] * len(x)),
        x=x.tolist(),
        unserved=[0] * len(x),
        objective=0.0,
        carbon_term=0.0,
        server_term=0,
    )


class TestDeriveWeights:
    """Test per-origin weights and aggregate fractions."""

    def test_local_serving_is_identity(self):
        """Test a diagonal plan routes every request locally."""
        weights = derive_weights(plan_of(np.diag([100, 200, 50])))
        np.testing.assert_allclose(weights.w, np.eye(3))

    def test_redirection(self):
        """Test rows, fractions and inbound counts."""
        weights = derive_weights(plan_of([[0, 100], [0, 50]]))
        assert weights.w == [[0.0, 1.0], [0.0, 1.0]]
        assert weights.f == [0.0, 1.0]
        assert weights.t == [0, 150]

    def test_empty_origin_falls_back(self):
        """Test an origin with no planned demand has a zero row."""
        weights = derive_weights(plan_of([[0, 0], [0, 30]]))
        assert weights.is_fallback(0)
        assert not weights.is_fallback(1)

    def test_rows_are_stochastic(self, instance_factory):
        """Test every non-empty row sums to one."""
        rng = np.random.default_rng(1)
        for _ in range(20):
            n = 4
            inst = instance_factory(
                rng.integers(1, 500, size=n).astype(float),
                rng.integers(0, 300, size=n),
                rng.integers(1, 80, size=(n, n)).astype(float),
                slo_ms=50,
                capacity=25,
                max_servers=30,
            )
            plan = solve_cap(inst)
            weights = derive_weights(plan)
            x = plan.x_array()
            for i, row in enumerate(weights.w):
                if weights.is_fallback(i):
                    continue
                assert sum(row) == pytest.approx(1.0, abs=1e-9)
                for j, w in enumerate(row):
                    assert w == 0 or x[i, j] > 0


class TestDispatch:
    """Test single-request dispatch."""

    def test_planned(self, instance_factory):
        """Test a request goes to its weighted destination."""
        inst = instance_factory([100, 10], [0, 0], [[1, 10], [10, 1]], slo_ms=20)
        weights = derive_weights(plan_of([[0, 100], [0, 0]]))
        state = RegionLoadState(capacity=[0, 100])

        j, outcome = dispatch(0, weights, state, inst, np.random.default_rng(0))
        assert (j, outcome) == (1, DispatchOutcome.PLANNED)
        assert state.served.tolist() == [0, 1]

    def test_spillover_to_greenest_feasible(self, instance_factory):
        """Test a full destination spills to the greenest region within the SLO."""
        inst = instance_factory(
            [300, 10, 100, 50],
            [0, 0, 0, 0],
            [[1, 10, 15, 80], [10, 1, 10, 10], [15, 10, 1, 10], [80, 10, 10, 1]],
            slo_ms=20,
        )
        weights = derive_weights(plan_of([[0, 5, 0, 0], [0] * 4, [0] * 4, [0] * 4]))
        state = RegionLoadState(capacity=[10, 0, 10, 10])

        j, outcome = dispatch(0, weights, state, inst, np.random.default_rng(0))
        # region 3 is greener but 80 ms away
        assert (j, outcome) == (2, DispatchOutcome.SPILLOVER)
        assert state.spillovers.tolist() == [0, 0, 1, 0]

    def test_local_overload(self, instance_factory):
        """Test a request is served at its origin when nothing has room."""
        inst = instance_factory([100, 10], [0, 0], [[1, 10], [10, 1]], slo_ms=20)
        weights = derive_weights(plan_of([[0, 100], [0, 0]]))
        state = RegionLoadState(capacity=[0, 0])

        j, outcome = dispatch(0, weights, state, inst, np.random.default_rng(0))
        assert (j, outcome) == (0, DispatchOutcome.LOCAL_OVERLOAD)
        assert state.overloads.tolist() == [1, 0]
        assert state.served.tolist() == [1, 0]

    def test_spillover_order(self, instance_factory):
        """Test greenest first, then nearest, then index."""
        inst = instance_factory(
            [50, 50, 10, 50], [0] * 4,
            [[1, 5, 90, 5], [5, 1, 5, 5], [90, 5, 1, 5], [5, 5, 5, 1]], slo_ms=20,
        )
        assert spillover_order(0, inst) == [0, 1, 3]

    def test_never_exceeds_slo(self, instance_factory):
        """Test every destination except the origin fallback is within the SLO."""
        rng = np.random.default_rng(9)
        inst = instance_factory(
            [400, 50, 100], [600, 0, 0], [[1, 15, 40], [15, 1, 30], [40, 30, 1]],
            slo_ms=20, capacity=100, max_servers=4,
        )
        plan = solve_cap(inst)
        weights = derive_weights(plan)
        state = RegionLoadState.for_plan(plan, inst)
        for _ in range(2000):
            j, outcome = dispatch(0, weights, state, inst, rng)
            assert inst.latency[0, j] <= inst.slo_ms or outcome is DispatchOutcome.LOCAL_OVERLOAD

    def test_deterministic(self, instance_factory):
        """Test identical seeds give identical outcome sequences."""
        inst = instance_factory([100, 50, 20], [0] * 3, np.ones((3, 3)), slo_ms=20)
        weights = derive_weights(plan_of([[10, 20, 30], [0, 5, 5], [1, 1, 1]]))

        def sequence(seed):
            rng = np.random.default_rng(seed)
            state = RegionLoadState(capacity=[30, 30, 30])
            return [dispatch(k % 3, weights, state, inst, rng) for k in range(300)]

        assert sequence(4) == sequence(4)


class TestWeightSampling:
    """Test sampled routing converges to the weights."""

    def test_law_of_large_numbers(self, instance_factory):
        """Test 1e5 uncapped dispatches match each row within 2%."""
        inst = instance_factory([1, 1, 1], [0] * 3, np.ones((3, 3)), slo_ms=20)
        weights = derive_weights(plan_of([[10, 30, 60], [50, 50, 0], [0, 0, 7]]))
        rng = np.random.default_rng(42)
        state = RegionLoadState(capacity=[10**9] * 3)

        counts = np.zeros((3, 3))
        for k in range(100_000):
            origin = k % 3
            j, outcome = dispatch(origin, weights, state, inst, rng)
            assert outcome is DispatchOutcome.PLANNED
            counts[origin, j] += 1

        empirical = counts / counts.sum(axis=1, keepdims=True)
        np.testing.assert_allclose(empirical, weights.w, atol=0.02)

    def test_batch_matches_weights(self, instance_factory):
        """Test batch dispatch follows the same rows."""
        inst = instance_factory([1, 1], [0, 0], np.ones((2, 2)), slo_ms=20)
        weights = derive_weights(plan_of([[25, 75], [0, 10]]))
        state = RegionLoadState(capacity=[10**9] * 2)

        outcome = dispatch_batch(0, 100_000, weights, state, inst, np.random.default_rng(1))
        assert outcome.total == 100_000
        np.testing.assert_allclose(outcome.planned / 100_000, [0.25, 0.75], atol=0.02)


class TestDispatchBatch:
    """Test dispatching a timestep's requests from one origin at once."""

    def test_overflow_spills_then_overloads(self, instance_factory):
        """Test planned first, then greedy-carbon spillover, then local overload."""
        inst = instance_factory(
            [300, 10, 100], [0] * 3, [[1, 10, 15], [10, 1, 10], [15, 10, 1]], slo_ms=20
        )
        weights = derive_weights(plan_of([[0, 1, 0], [0, 0, 0], [0, 0, 0]]))
        state = RegionLoadState(capacity=[2, 5, 3])

        outcome = dispatch_batch(0, 15, weights, state, inst, np.random.default_rng(0))
        assert outcome.planned.tolist() == [0, 5, 0]
        # greenest first: region 2 (100) before region 0 (300)
        assert outcome.spillover.tolist() == [2, 0, 3]
        assert outcome.local_overload == 5
        assert state.served.tolist() == [7, 5, 3]
        assert state.overloads.tolist() == [5, 0, 0]
        assert outcome.total == 15

    def test_planned_before_spillover(self, instance_factory):
        """Test batch and per-request dispatch fill the same capacity but split tags differently.

        Region 0 has no capacity, so its draws spill to region 2, the greenest.
        Per request, such a spill can take the slot a later draw for region 2
        needed; the batch resolves that draw as planned first.
        """
        inst = instance_factory(
            [300, 100, 10], [0] * 3, [[1, 10, 10], [10, 1, 10], [10, 10, 1]], slo_ms=20
        )
        weights = derive_weights(plan_of([[1, 0, 1], [0, 0, 0], [0, 0, 0]]))

        batch_planned = sequential_planned = 0
        for seed in range(200):
            batch_state = RegionLoadState(capacity=[0, 1, 1])
            outcome = dispatch_batch(0, 2, weights, batch_state, inst, np.random.default_rng(seed))

            state = RegionLoadState(capacity=[0, 1, 1])
            rng = np.random.default_rng(seed)
            tags = [dispatch(0, weights, state, inst, rng)[1] for _ in range(2)]

            assert batch_state.served.tolist() == state.served.tolist() == [0, 1, 1]
            batch_planned += int(outcome.planned.sum())
            sequential_planned += tags.count(DispatchOutcome.PLANNED)

        assert batch_planned > sequential_planned

    def test_without_spillover(self, instance_factory):
        """Test overflow goes straight to the origin when spillover is off."""
        inst = instance_factory([300, 10], [0, 0], [[1, 10], [10, 1]], slo_ms=20)
        weights = derive_weights(plan_of([[4, 0], [0, 0]]))
        state = RegionLoadState(capacity=[4, 100])

        outcome = dispatch_batch(
            0, 10, weights, state, inst, np.random.default_rng(0), spillover=False
        )
        assert outcome.planned.tolist() == [4, 0]
        assert outcome.spillover.tolist() == [0, 0]
        assert outcome.local_overload == 6

    def test_fallback_row(self, instance_factory):
        """Test an empty weight row serves locally."""
        inst = instance_factory([300, 10], [0, 0], [[1, 10], [10, 1]], slo_ms=20)
        weights = derive_weights(plan_of([[0, 0], [0, 3]]))
        state = RegionLoadState(capacity=[5, 100])

        outcome = dispatch_batch(0, 3, weights, state, inst, np.random.default_rng(0))
        assert outcome.planned.tolist() == [3, 0]
