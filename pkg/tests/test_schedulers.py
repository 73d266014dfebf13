import math

import numpy as np
import pytest

from aoisched import (
    AgeState,
    agnostic_step,
    broadcast_run_costs,
    greedy1_step,
    greedy2_step,
    make_scheduler,
    new_rounding_state,
    online_step,
    primal_objective,
    run_primal_dual,
    sample_instance,
    simulate_run,
    total_cost,
)
from aoisched.schedulers import (
    ChannelAgnosticScheduler,
    Greedy1Scheduler,
    Greedy2Scheduler,
    OnlineScheduler,
    rounding_transmit_masks,
)
from conftest import costs_of, make_pattern
from reference_impls import greedy1_argmin, greedy2_reference_run


class TestRoundingRule:
    def test_zero_mass_never_transmits(self):
        masks = rounding_transmit_masks(np.array([0.0, 0.0, 0.0]), np.linspace(0, 0.999, 50))
        assert not masks.any()

    def test_unit_mass_always_transmits(self):
        masks = rounding_transmit_masks(np.array([1.0, 1.0, 1.0]), np.linspace(0, 0.999, 50))
        assert masks.all()

    def test_unit_cost_schedule_saturates_and_transmits_every_slot(self, rng):
        pattern = make_pattern([[1] * 6], 1)
        costs = costs_of(1)
        sched = OnlineScheduler(costs, 1, seed=int(rng.integers(2**63)))
        run = simulate_run(sched, pattern, costs)
        assert run.decisions == (1,) * 6

    def test_mask_batch_equals_per_slot_stepping(self, rng):
        for _ in range(10):
            pattern, costs = sample_instance(rng, n_max=4, t_max=25)
            reference = run_primal_dual(pattern, costs)
            masses = np.minimum(np.asarray(reference.x_val[1:]), 1.0)
            seeds = rng.integers(2**63, size=17)
            masks = rounding_transmit_masks(
                masses, np.asarray([np.random.default_rng(int(s)).random() for s in seeds])
            )
            for row, seed in zip(masks, seeds):
                sched = OnlineScheduler(costs, pattern.n_users, seed=int(seed))
                run = simulate_run(sched, pattern, costs)
                assert np.array_equal(np.asarray(run.decisions) > 0, row)

    def test_cost_batch_matches_replay(self, rng):
        pattern, costs = sample_instance(rng, n_max=3, t_max=20)
        reference = run_primal_dual(pattern, costs)
        masses = np.minimum(np.asarray(reference.x_val[1:]), 1.0)
        levels = np.asarray(reference.k_star[1:])
        u = np.random.default_rng(7).random(64)
        masks = rounding_transmit_masks(masses, u)
        batch = broadcast_run_costs(masks, levels, costs)
        for row, expected in zip(masks, batch):
            decisions = [int(levels[t]) if row[t] else 0 for t in range(pattern.horizon)]
            assert total_cost(decisions, pattern, costs).total_cost == pytest.approx(
                expected, rel=1e-12
            )

    def test_u_advances_by_one_per_transmission(self, rng):
        pattern, costs = sample_instance(rng, n_max=3, t_max=40)
        sched = OnlineScheduler(costs, pattern.n_users, seed=3)
        u0 = sched.state.u
        run = simulate_run(sched, pattern, costs)
        transmissions = sum(1 for d in run.decisions if d > 0)
        assert sched.state.u == pytest.approx(u0 + transmissions)

    def test_slot_mass_window_invariant(self, rng):
        pattern, costs = sample_instance(rng, n_max=3, t_max=30)
        state = new_rounding_state(pattern.n_users, costs, seed=5)
        for t in range(1, pattern.horizon + 1):
            online_step(state, pattern.slot_thresholds(t), costs)
            mass = min(state.pd.x_val[t], 1.0)
            assert 0.0 <= mass <= 1.0
            assert state.x_sum - state.x_pre_sum == pytest.approx(mass)

    def test_marginal_transmit_frequency(self, rng):
        pattern, costs = sample_instance(rng, n_max=3, t_max=10)
        reference = run_primal_dual(pattern, costs)
        masses = np.minimum(np.asarray(reference.x_val[1:]), 1.0)
        draws = 40_000
        u = np.random.default_rng(99).random(draws)
        freq = rounding_transmit_masks(masses, u).mean(axis=0)
        sigma = np.sqrt(masses * (1.0 - masses) / draws)
        assert np.all(np.abs(freq - masses) <= 3.5 * sigma + 1e-12)


class TestOnlineScheduler:
    def test_x_trace_is_bit_identical_to_reference(self, rng):
        for _ in range(10):
            pattern, costs = sample_instance(rng, n_max=4, t_max=50)
            sched = OnlineScheduler(costs, pattern.n_users, seed=int(rng.integers(2**63)))
            simulate_run(sched, pattern, costs)
            reference = run_primal_dual(pattern, costs)
            assert sched.state.pd.x_val == reference.x_val
            assert sched.state.pd.triggers == reference.triggers

    def test_transmits_at_the_all_users_level(self, rng):
        pattern, costs = sample_instance(rng, n_max=4, t_max=40)
        sched = OnlineScheduler(costs, pattern.n_users, seed=8)
        run = simulate_run(sched, pattern, costs)
        for t, d in enumerate(run.decisions, start=1):
            if d > 0:
                assert d == int(pattern.slot_thresholds(t).max())

    def test_online_property(self, rng):
        # permuting thresholds of future slots never changes earlier decisions
        pattern, costs = sample_instance(rng, n_max=4, t_max=30, t_min=10)
        T = pattern.horizon
        cut = T // 2
        shuffled = pattern.thresholds.copy()
        rng.shuffle(shuffled[:, cut:], axis=1)
        permuted = make_pattern(shuffled, pattern.m_levels)
        for name, seed in (("online", 4), ("agnostic", 4), ("greedy1", None), ("greedy2", None)):
            a = make_scheduler(name, costs, pattern.n_users, seed=seed)
            b = make_scheduler(name, costs, pattern.n_users, seed=seed)
            da = [a.step(t, pattern.slot_thresholds(t)) for t in range(1, cut + 1)]
            db = [b.step(t, permuted.slot_thresholds(t)) for t in range(1, cut + 1)]
            assert da == db, name

    def test_requires_seed(self):
        with pytest.raises(ValueError):
            OnlineScheduler(costs_of(2), 1, seed=None)

    def test_expected_cost_below_primal(self, rng):
        for _ in range(5):
            pattern, costs = sample_instance(rng, n_max=3, t_max=15)
            reference = run_primal_dual(pattern, costs)
            masses = np.minimum(np.asarray(reference.x_val[1:]), 1.0)
            levels = np.asarray(reference.k_star[1:])
            draws = 20_000
            u = np.random.default_rng(1234).random(draws)
            costs_mc = broadcast_run_costs(rounding_transmit_masks(masses, u), levels, costs)
            mean = costs_mc.mean()
            se = costs_mc.std(ddof=1) / math.sqrt(draws)
            assert mean <= primal_objective(reference, costs) + 3.0 * se


class TestAgnosticScheduler:
    def test_trace_ignores_the_channel(self, rng):
        costs = costs_of(3, 4, 5)
        a = ChannelAgnosticScheduler(costs, 4, seed=21)
        b = ChannelAgnosticScheduler(costs, 4, seed=21)
        pattern_a, _ = sample_instance(rng, n_max=4, t_max=30, m_max=3, t_min=30)
        pattern_b, _ = sample_instance(rng, n_max=4, t_max=30, m_max=3, t_min=30)
        pa = make_pattern(np.clip(pattern_a.thresholds[:4], 1, 3), 3)
        pb = make_pattern(np.clip(pattern_b.thresholds[:4], 1, 3), 3)
        da = [a.step(t, pa.slot_thresholds(t)) for t in range(1, 31)]
        db = [b.step(t, pb.slot_thresholds(t)) for t in range(1, 31)]
        assert da == db

    def test_transmits_at_max_level_only(self, rng):
        pattern, costs = sample_instance(rng, n_max=3, t_max=40)
        sched = ChannelAgnosticScheduler(costs, pattern.n_users, seed=13)
        run = simulate_run(sched, pattern, costs)
        assert set(run.decisions) <= {0, costs.m_levels}

    def test_first_slot_closed_form(self):
        costs = costs_of(4, 6)
        state = new_rounding_state(2, costs, seed=0)
        theta = state.pd.theta
        first_mass = 1.0 / (theta * costs.c_max)
        state.u = first_mass - 1e-9
        assert agnostic_step(state, costs) == 2
        state = new_rounding_state(2, costs, seed=0)
        state.u = first_mass + 1e-9
        assert agnostic_step(state, costs) == 0

    def test_cumulative_flush_probability(self, rng):
        # probability that a packet is flushed by slot t equals the capped
        # mass accumulated since its arrival
        costs = costs_of(6, 9)
        T = 12
        state = run_primal_dual(make_pattern([[1] * T], 2), costs, k_override=2)
        masses = np.minimum(np.asarray(state.x_val[1:]), 1.0)
        draws = 40_000
        u = np.random.default_rng(5).random(draws)
        masks = rounding_transmit_masks(masses, u)
        for j in (1, 3, 7):
            for t in (j, min(j + 3, T), T):
                flushed = masks[:, j - 1 : t].any(axis=1).mean()
                expected = min(float(np.sum(masses[j - 1 : t])), 1.0)
                sigma = math.sqrt(max(expected * (1 - expected), 1e-12) / draws)
                assert abs(flushed - expected) <= 4.0 * sigma + 1e-9


class TestGreedy1:
    def test_idles_when_everything_is_fresh(self):
        ages = AgeState.initial(3)
        assert greedy1_step(ages, np.array([1, 2, 1]), costs_of(1, 2)) == 0

    def test_transmits_once_age_dominates(self):
        ages = AgeState(ages=[10], t=3)
        assert greedy1_step(ages, np.array([1]), costs_of(2, 3)) == 1

    def test_matches_brute_force_argmin(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 5))
            ages = AgeState(ages=rng.integers(0, 30, size=n), t=5)
            col = rng.integers(1, m + 1, size=n)
            costs_list = np.sort(rng.uniform(1, 40, size=m))
            costs = costs_of(*costs_list)
            expected = greedy1_argmin(
                ages.ages.tolist(), col.tolist(), [0.0] + list(costs.costs)
            )
            assert greedy1_step(ages, col, costs) == expected

    def test_deterministic(self, rng):
        ages = AgeState(ages=[4, 2], t=1)
        col = np.array([2, 1])
        costs = costs_of(2, 2)
        assert greedy1_step(ages, col, costs) == greedy1_step(ages, col, costs)


class TestGreedy2:
    def test_idles_when_everything_is_fresh(self):
        ages = AgeState.initial(2)
        g = np.zeros(2)
        assert greedy2_step(ages, g, np.array([1, 1]), costs_of(1, 3)) == 0

    def test_ski_rental_style_transmit_after_three_idles(self):
        # given three idle slots (cumulative cost 1+2+3=6, age 3), a fourth
        # idle would cost 6+4=10 while transmitting costs 5
        costs = costs_of(5)
        ages = AgeState(ages=[3], t=3)
        g = np.array([6.0])
        assert greedy2_step(ages, g, np.array([1]), costs) == 1
        assert g[0] == 0.0

    def test_own_run_transmits_once_cumulative_cost_passes_c1(self):
        # under its own decisions the cumulative cost reaches 6 > 5 at slot 3
        costs = costs_of(5)
        pattern = make_pattern([[1, 1, 1, 1]], 1)
        sched = Greedy2Scheduler(costs, 1)
        decisions = [sched.step(t, pattern.slot_thresholds(t)) for t in range(1, 5)]
        assert decisions == [0, 0, 1, 0]

    def test_matches_reference_run(self, rng):
        for _ in range(20):
            pattern, costs = sample_instance(rng, n_max=4, t_max=25)
            sched = Greedy2Scheduler(costs, pattern.n_users)
            run = simulate_run(sched, pattern, costs)
            expected = greedy2_reference_run(
                pattern.thresholds, [0.0] + list(costs.costs)
            )
            assert list(run.decisions) == expected

    def test_updates_cumulative_costs_in_place(self):
        ages = AgeState(ages=[2], t=2)
        g = np.array([3.0])
        d = greedy2_step(ages, g, np.array([1]), costs_of(50))
        assert d == 0
        assert g[0] == pytest.approx(6.0)  # 3 + (2 + 1)


class TestFactory:
    def test_all_names_construct(self):
        costs = costs_of(2, 3)
        for name in ("online", "agnostic", "greedy1", "greedy2"):
            sched = make_scheduler(name, costs, 2, seed=1)
            assert sched.name == name

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown scheduler"):
            make_scheduler("mystery", costs_of(2), 1)

    def test_greedy_matches_functional_core(self, rng):
        pattern, costs = sample_instance(rng, n_max=3, t_max=20)
        sched = Greedy1Scheduler(costs, pattern.n_users)
        ages = AgeState.initial(pattern.n_users)
        for t in range(1, pattern.horizon + 1):
            col = pattern.slot_thresholds(t)
            expected = greedy1_step(ages, col, costs)
            assert sched.step(t, col) == expected
            from aoisched import advance_age

            ages = advance_age(ages, pattern, expected)
