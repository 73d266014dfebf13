import json

import numpy as np
import pytest

from aoisched import (
    AgeState,
    ChannelPattern,
    ConfigurationError,
    CostSchedule,
    advance_age,
    decode_indicator,
    k_star,
    k_star_all,
    load_pattern,
    sample_instance,
    save_pattern,
    total_cost,
)
from conftest import costs_of, make_pattern
from reference_impls import queue_system_sizes, replay_cost_by_users


class TestCostSchedule:
    def test_level_zero_is_free(self):
        costs = costs_of(2, 3)
        assert costs.cost(0) == 0.0
        assert costs.cost(1) == 2.0
        assert costs.cost(2) == 3.0

    def test_rejects_sub_unit_lowest_cost(self):
        with pytest.raises(ConfigurationError):
            costs_of(0.5, 3)

    def test_rejects_decreasing_costs(self):
        with pytest.raises(ConfigurationError):
            costs_of(3, 2)

    def test_rejects_empty(self):
        with pytest.raises(ConfigurationError):
            CostSchedule(())

    def test_level_out_of_range(self):
        with pytest.raises(ValueError):
            costs_of(2, 3).cost(3)
        with pytest.raises(ValueError):
            costs_of(2, 3).cost(-1)

    def test_linear_rule_reproduces_step_five_schedule(self):
        costs = CostSchedule.linear(10.0, 5.0, 4)
        assert costs.costs == (10.0, 15.0, 20.0, 25.0)


class TestChannelPattern:
    def test_rejects_out_of_range_threshold(self):
        with pytest.raises(ConfigurationError):
            make_pattern([[0, 1]], 2)
        with pytest.raises(ConfigurationError):
            make_pattern([[1, 3]], 2)

    def test_thresholds_read_only(self):
        pattern = make_pattern([[1, 2]], 2)
        with pytest.raises(ValueError):
            pattern.thresholds[0, 0] = 2

    def test_json_roundtrip(self, tmp_path):
        pattern = make_pattern([[1, 2, 1], [2, 2, 1]], 3)
        path = tmp_path / "pattern.json"
        save_pattern(pattern, path)
        loaded = load_pattern(path)
        assert loaded.m_levels == 3
        assert np.array_equal(loaded.thresholds, pattern.thresholds)
        data = json.loads(path.read_text())
        assert set(data) == {"n_users", "horizon", "m_levels", "thresholds"}

    def test_zero_horizon_allowed(self):
        pattern = ChannelPattern(np.zeros((2, 0), dtype=np.int64), 3)
        assert pattern.horizon == 0
        assert k_star_all(pattern).size == 0


class TestDecodeIndicator:
    def test_higher_level_decodes(self):
        pattern = make_pattern([[2]], 3)
        assert decode_indicator(pattern, 0, 3, 1) == 1

    def test_lower_level_does_not(self):
        pattern = make_pattern([[2]], 3)
        assert decode_indicator(pattern, 0, 1, 1) == 0

    def test_idle_never_decodes(self):
        pattern = make_pattern([[1]], 3)
        assert decode_indicator(pattern, 0, 0, 1) == 0

    def test_out_of_range_usage_errors(self):
        pattern = make_pattern([[1, 2]], 2)
        with pytest.raises(ValueError):
            decode_indicator(pattern, 1, 1, 1)
        with pytest.raises(ValueError):
            decode_indicator(pattern, 0, 3, 1)
        with pytest.raises(ValueError):
            decode_indicator(pattern, 0, 1, 3)
        with pytest.raises(ValueError):
            decode_indicator(pattern, 0, 1, 0)


class TestKStar:
    def test_is_max_threshold(self):
        pattern = make_pattern([[2], [1], [3]], 3)
        assert k_star(pattern, 1) == 3

    def test_all_low(self):
        pattern = make_pattern([[1, 1], [1, 1]], 4)
        assert k_star(pattern, 1) == 1

    def test_single_user(self):
        pattern = make_pattern([[2]], 2)
        assert k_star(pattern, 1) == 2

    def test_vectorized_matches_scalar(self, rng):
        pattern, _ = sample_instance(rng, t_max=30)
        ks = k_star_all(pattern)
        assert all(ks[t - 1] == k_star(pattern, t) for t in range(1, pattern.horizon + 1))


class TestAdvanceAge:
    def test_broadcast_reaches_everyone(self):
        pattern = make_pattern([[1], [1]], 2)
        state = AgeState(ages=[3, 0], t=0)
        out = advance_age(state, pattern, 2)
        assert out.ages.tolist() == [0, 0] and out.t == 1

    def test_idle_slot(self):
        pattern = make_pattern([[1], [1]], 2)
        state = AgeState(ages=[3, 0], t=0)
        out = advance_age(state, pattern, 0)
        assert out.ages.tolist() == [4, 1]

    def test_partial_coverage(self):
        pattern = make_pattern([[1], [2]], 2)
        state = AgeState(ages=[2, 5], t=0)
        out = advance_age(state, pattern, 1)
        assert out.ages.tolist() == [0, 6]

    def test_initial_ages_zero(self):
        state = AgeState.initial(3)
        assert state.ages.tolist() == [0, 0, 0] and state.t == 0

    def test_age_either_resets_or_increments(self, rng):
        pattern, _ = sample_instance(rng, t_max=25)
        state = AgeState.initial(pattern.n_users)
        for t in range(1, pattern.horizon + 1):
            d = int(rng.integers(0, pattern.m_levels + 1))
            new = advance_age(state, pattern, d)
            for before, after in zip(state.ages, new.ages):
                assert after in (0, before + 1)
            state = new

    def test_beyond_horizon_raises(self):
        pattern = make_pattern([[1]], 1)
        state = AgeState(ages=[0], t=1)
        with pytest.raises(ValueError):
            advance_age(state, pattern, 0)


class TestTotalCost:
    def test_hand_replay_two_slots(self):
        pattern = make_pattern([[1, 1]], 1)
        costs = costs_of(2.5)
        run = total_cost([1, 0], pattern, costs)
        assert run.total_cost == pytest.approx(2.5 + 1.0)
        assert run.tx_costs == (2.5, 0.0)
        assert run.avg_age_costs == (0.0, 1.0)

    def test_all_idle_ages_accumulate(self):
        pattern = make_pattern([[1, 1, 1]], 1)
        run = total_cost([0, 0, 0], pattern, costs_of(5))
        assert run.total_cost == pytest.approx(6.0)
        assert run.time_avg_total_cost == pytest.approx(2.0)
        assert run.time_avg_age == pytest.approx(2.0)

    def test_matches_independent_replay(self, rng):
        for _ in range(25):
            pattern, costs = sample_instance(rng, n_max=4, t_max=30)
            decisions = rng.integers(0, pattern.m_levels + 1, size=pattern.horizon)
            run = total_cost(decisions, pattern, costs)
            level_costs = [0.0] + list(costs.costs)
            expected = replay_cost_by_users(pattern.thresholds, decisions, level_costs)
            assert run.total_cost == pytest.approx(expected, rel=1e-12)

    def test_totals_are_consistent(self, rng):
        pattern, costs = sample_instance(rng, t_max=20)
        decisions = rng.integers(0, pattern.m_levels + 1, size=pattern.horizon)
        run = total_cost(decisions, pattern, costs)
        assert run.total_cost == pytest.approx(sum(run.tx_costs) + sum(run.avg_age_costs))
        assert len(run.decisions) == pattern.horizon
        assert min(run.tx_costs) >= 0 and min(run.avg_age_costs) >= 0

    def test_length_mismatch_raises(self):
        pattern = make_pattern([[1, 1]], 1)
        with pytest.raises(ValueError):
            total_cost([0], pattern, costs_of(2))

    def test_run_csv_and_summary(self, tmp_path):
        pattern = make_pattern([[1, 1]], 1)
        run = total_cost([1, 0], pattern, costs_of(2))
        csv_path = tmp_path / "run.csv"
        run.write_csv(csv_path)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "slot,decision,tx_cost,avg_age_cost"
        assert len(lines) == 3
        json_path = tmp_path / "run.json"
        run.write_summary_json(json_path)
        summary = json.loads(json_path.read_text())
        assert set(summary) == {"total_cost", "time_avg_total_cost", "time_avg_age"}


class TestModelProperties:
    def test_queue_system_matches_ages(self, rng):
        for _ in range(20):
            pattern, _ = sample_instance(rng, n_max=4, t_max=30)
            decisions = rng.integers(0, pattern.m_levels + 1, size=pattern.horizon)
            sizes = queue_system_sizes(pattern.thresholds, decisions)
            state = AgeState.initial(pattern.n_users)
            for t in range(1, pattern.horizon + 1):
                state = advance_age(state, pattern, int(decisions[t - 1]))
                assert np.array_equal(sizes[:, t - 1], state.ages)

    def test_cost_additive_over_slot_partition(self, rng):
        for _ in range(15):
            pattern, costs = sample_instance(rng, t_max=30, t_min=2)
            T = pattern.horizon
            decisions = [int(d) for d in rng.integers(0, pattern.m_levels + 1, size=T)]
            tau = int(rng.integers(1, T))
            full = total_cost(decisions, pattern, costs).total_cost
            head_pattern = ChannelPattern(pattern.thresholds[:, :tau], pattern.m_levels)
            head = total_cost(decisions[:tau], head_pattern, costs).total_cost
            state = AgeState.initial(pattern.n_users)
            for t in range(1, tau + 1):
                state = advance_age(state, pattern, decisions[t - 1])
            tail = 0.0
            for t in range(tau + 1, T + 1):
                state = advance_age(state, pattern, decisions[t - 1])
                tail += costs.cost(decisions[t - 1]) + int(state.ages.sum()) / pattern.n_users
            assert full == pytest.approx(head + tail, rel=1e-12, abs=1e-9)

    def test_raising_a_decision_never_increases_ages(self, rng):
        for _ in range(20):
            pattern, _ = sample_instance(rng, t_max=25)
            T = pattern.horizon
            decisions = [int(d) for d in rng.integers(0, pattern.m_levels + 1, size=T)]
            slot = int(rng.integers(1, T + 1))
            if decisions[slot - 1] >= pattern.m_levels:
                continue
            bumped = list(decisions)
            bumped[slot - 1] += 1
            base_state = AgeState.initial(pattern.n_users)
            bump_state = AgeState.initial(pattern.n_users)
            for t in range(1, T + 1):
                base_state = advance_age(base_state, pattern, decisions[t - 1])
                bump_state = advance_age(bump_state, pattern, bumped[t - 1])
                assert np.all(bump_state.ages <= base_state.ages)
