"""Decision-producing schedulers behind one per-slot stepping interface.

Four schedulers share the contract ``step(t, slot_thresholds) -> level``:

* ``online``: randomized coupled rounding of the fractional mass produced
  by the covering/packing state machine; observes the current slot's
  thresholds only.
* ``agnostic``: the same rounding run entirely at the maximum power level;
  needs the cost schedule and nothing about the channel.
* ``greedy1``: myopic minimizer of this slot's transmission-plus-age cost.
* ``greedy2``: minimizer of transmission cost plus cumulative age cost
  accrued since each user's last successful reception.

The rounding schedulers draw one uniform number at construction and stay
deterministic afterwards; a fresh draw per slot would break the coupling
that makes the per-slot transmit probability equal the clipped mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import AgeState, CostSchedule, resolve_ages
from .primal_dual import PdState, new_pd_state, pd_step_slot

SCHEDULER_NAMES = ("online", "agnostic", "greedy1", "greedy2")


@dataclass
class RoundingState:
    """Coupled-uniform rounding state on top of the fractional machine.

    ``x_sum - x_pre_sum`` equals the current slot's clipped mass, and ``u``
    grows by exactly one per transmission, so at most one transmission
    happens per unit of accumulated mass.
    """

    pd: PdState
    u: float
    x_pre_sum: float = 0.0
    x_sum: float = 0.0


def new_rounding_state(n_users: int, costs: CostSchedule, seed) -> RoundingState:
    """Fresh rounding state; ``seed`` feeds the single uniform draw."""
    if seed is None:
        raise ValueError("rounding schedulers require an explicit seed")
    u = float(np.random.default_rng(seed).random())
    return RoundingState(pd=new_pd_state(n_users, costs), u=u)


def _decide(state: RoundingState, t: int, transmit_level: int) -> int:
    mass = min(state.pd.x_val[t], 1.0)
    state.x_pre_sum = state.x_sum
    state.x_sum = state.x_sum + mass
    if state.x_pre_sum <= state.u < state.x_sum:
        state.u += 1.0
        return transmit_level
    return 0


def online_step(state: RoundingState, slot_thresholds, costs: CostSchedule) -> int:
    """Advance one slot with the observed thresholds; returns the decision.

    Transmits at the smallest level reaching every user exactly when the
    rounding interval of this slot's clipped mass contains the running
    uniform point, else idles.
    """
    t = state.pd.t_done + 1
    col = np.asarray(slot_thresholds)
    pd_step_slot(state.pd, col, costs, t)
    return _decide(state, t, state.pd.k_star[t])


def agnostic_step(state: RoundingState, costs: CostSchedule) -> int:
    """Advance one slot without any channel observation.

    Runs the sweep pinned at the maximum level and transmits at that level
    on rounding hits; depends only on the cost schedule, the slot count
    and the uniform draw.
    """
    t = state.pd.t_done + 1
    pd_step_slot(state.pd, None, costs, t, k_override=costs.m_levels)
    return _decide(state, t, costs.m_levels)


def greedy1_step(ages: AgeState, slot_thresholds, costs: CostSchedule) -> int:
    """Level minimizing this slot's cost: transmission plus mean end-of-slot
    age.  Ties break toward the smallest level (idle first)."""
    col = np.asarray(slot_thresholds)
    n = ages.n_users
    best_d, best_v = 0, None
    for d in range(costs.m_levels + 1):
        end_ages = resolve_ages(ages.ages, col, d)
        v = costs.cost(d) + int(end_ages.sum()) / n
        if best_v is None or v < best_v:
            best_d, best_v = d, v
    return best_d


def greedy2_step(ages: AgeState, cum_costs: np.ndarray, slot_thresholds, costs: CostSchedule) -> int:
    """Level minimizing transmission cost plus mean cumulative age cost.

    ``cum_costs`` holds, per user, the age cost accrued since its last
    reception; it resets on decode and otherwise grows by the end-of-slot
    age.  The chosen level's update is applied to ``cum_costs`` in place.
    """
    col = np.asarray(slot_thresholds)
    n = ages.n_users
    best_d, best_v, best_g = 0, None, None
    for d in range(costs.m_levels + 1):
        end_ages = resolve_ages(ages.ages, col, d)
        decoded = (col <= d) if d >= 1 else np.zeros(n, dtype=bool)
        g_new = np.where(decoded, 0.0, cum_costs + end_ages)
        v = costs.cost(d) + float(g_new.sum()) / n
        if best_v is None or v < best_v:
            best_d, best_v, best_g = d, v, g_new
    cum_costs[:] = best_g
    return best_d


class OnlineScheduler:
    """Stateful wrapper around :func:`online_step`."""

    name = "online"

    def __init__(self, costs: CostSchedule, n_users: int, seed):
        self.costs = costs
        self.state = new_rounding_state(n_users, costs, seed)

    def step(self, t: int, slot_thresholds) -> int:
        if t != self.state.pd.t_done + 1:
            raise ValueError(f"expected slot {self.state.pd.t_done + 1}, got {t}")
        return online_step(self.state, slot_thresholds, self.costs)


class ChannelAgnosticScheduler:
    """Stateful wrapper around :func:`agnostic_step`; ignores observations."""

    name = "agnostic"

    def __init__(self, costs: CostSchedule, n_users: int, seed):
        self.costs = costs
        self.state = new_rounding_state(n_users, costs, seed)

    def step(self, t: int, slot_thresholds=None) -> int:
        if t != self.state.pd.t_done + 1:
            raise ValueError(f"expected slot {self.state.pd.t_done + 1}, got {t}")
        return agnostic_step(self.state, self.costs)


class Greedy1Scheduler:
    name = "greedy1"

    def __init__(self, costs: CostSchedule, n_users: int, seed=None):
        self.costs = costs
        self.ages = AgeState.initial(n_users)

    def step(self, t: int, slot_thresholds) -> int:
        if t != self.ages.t + 1:
            raise ValueError(f"expected slot {self.ages.t + 1}, got {t}")
        col = np.asarray(slot_thresholds)
        d = greedy1_step(self.ages, col, self.costs)
        self.ages = AgeState(ages=resolve_ages(self.ages.ages, col, d), t=t)
        return d


class Greedy2Scheduler:
    name = "greedy2"

    def __init__(self, costs: CostSchedule, n_users: int, seed=None):
        self.costs = costs
        self.ages = AgeState.initial(n_users)
        self.cum_costs = np.zeros(n_users)

    def step(self, t: int, slot_thresholds) -> int:
        if t != self.ages.t + 1:
            raise ValueError(f"expected slot {self.ages.t + 1}, got {t}")
        col = np.asarray(slot_thresholds)
        d = greedy2_step(self.ages, self.cum_costs, col, self.costs)
        self.ages = AgeState(ages=resolve_ages(self.ages.ages, col, d), t=t)
        return d


def make_scheduler(name: str, costs: CostSchedule, n_users: int, seed=None):
    """Instantiate a scheduler by name ("online", "agnostic", "greedy1", "greedy2")."""
    if name == "online":
        return OnlineScheduler(costs, n_users, seed)
    if name == "agnostic":
        return ChannelAgnosticScheduler(costs, n_users, seed)
    if name == "greedy1":
        return Greedy1Scheduler(costs, n_users)
    if name == "greedy2":
        return Greedy2Scheduler(costs, n_users)
    raise ValueError(f"unknown scheduler {name!r}; choose from {SCHEDULER_NAMES}")


def rounding_transmit_masks(clipped_masses: np.ndarray, u_draws: np.ndarray) -> np.ndarray:
    """Transmit patterns of the coupled rounding rule for many draws.

    Row ``r`` of the returned (draws, slots) boolean array is exactly the
    transmit/idle pattern that per-slot stepping with uniform draw
    ``u_draws[r]`` would produce, given the per-slot clipped masses.  The
    masses do not depend on the draw, which is what makes this batch form
    equivalent to stepping.
    """
    masses = np.asarray(clipped_masses, dtype=float)
    u = np.asarray(u_draws, dtype=float)
    if masses.ndim != 1 or u.ndim != 1:
        raise ValueError("expected 1-D masses and draws")
    if masses.size and (masses.min() < 0.0 or masses.max() > 1.0):
        raise ValueError("clipped masses must lie in [0, 1]")
    out = np.empty((u.size, masses.size), dtype=bool)
    lattice = u.copy()  # u plus one per past transmission
    x_prev = 0.0
    for idx, mass in enumerate(masses):
        x_next = x_prev + mass
        hit = (x_prev <= lattice) & (lattice < x_next)
        out[:, idx] = hit
        lattice += hit
        x_prev = x_next
    return out


def broadcast_run_costs(
    transmit_masks: np.ndarray, levels: np.ndarray, costs: CostSchedule
) -> np.ndarray:
    """Total cost per draw for transmit patterns that reach every user.

    Valid only for schedulers whose every transmission resets all users
    (the rounding schedulers): ages then follow one shared trajectory, so
    the mean age equals that single age.
    """
    masks = np.asarray(transmit_masks, dtype=bool)
    levels = np.asarray(levels)
    if masks.ndim != 2 or masks.shape[1] != levels.size:
        raise ValueError("masks must be (draws, slots) matching levels")
    draws = masks.shape[0]
    age = np.zeros(draws)
    total = np.zeros(draws)
    for idx in range(levels.size):
        hit = masks[:, idx]
        total += np.where(hit, costs.cost(int(levels[idx])), 0.0)
        age = np.where(hit, 0.0, age + 1.0)
        total += age
    return total
