"""Exact offline optimum for desk-scale instances, plus the certified
lower bound usable at any scale.

The dynamic program may pick any level each slot, including ones that
reach only part of the audience; restricting it to the all-users level
would bias measured ratios downward.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .errors import CapacityError
from .model import ChannelPattern, CostSchedule
from .primal_dual import dual_objective, run_primal_dual

DEFAULT_N_CAP = 4
DEFAULT_T_CAP = 30


@dataclass(frozen=True)
class OptResult:
    """Minimum total cost with one optimal decision trace and solver stats."""

    opt_cost: float
    decisions: tuple[int, ...]
    states_expanded: int
    wall_time: float


def solve_opt_dp(
    pattern: ChannelPattern,
    costs: CostSchedule,
    *,
    n_cap: int = DEFAULT_N_CAP,
    t_cap: int = DEFAULT_T_CAP,
) -> OptResult:
    """Exact forward dynamic program over reachable age vectors.

    State is the per-user age vector at the end of a slot; transitions are
    the idle/transmit levels with stage cost equal to the level cost plus
    the mean end-of-slot age.  Ties prefer the smaller incoming level,
    then the lexicographically smaller decision prefix, so the returned
    trace is stable.

    Raises :class:`CapacityError` above the caps; use
    :func:`dual_lower_bound` for a certified bound on large instances.
    """
    n, T = pattern.n_users, pattern.horizon
    if n > n_cap or T > t_cap:
        raise CapacityError(
            f"instance (n_users={n}, horizon={T}) exceeds the exact-solver caps "
            f"(n<={n_cap}, T<={t_cap}); use dual_lower_bound for a certified bound"
        )
    if costs.m_levels != pattern.m_levels:
        raise ValueError("cost schedule and pattern disagree on the level count")
    start = time.perf_counter()
    m = costs.m_levels
    level_costs = [costs.cost(d) for d in range(m + 1)]
    # ages -> (cost, last level, decision prefix)
    frontier: dict[tuple[int, ...], tuple[float, int, tuple[int, ...]]] = {
        (0,) * n: (0.0, 0, ())
    }
    states_expanded = 0
    for t in range(1, T + 1):
        thr = pattern.thresholds[:, t - 1]
        nxt: dict[tuple[int, ...], tuple[float, int, tuple[int, ...]]] = {}
        states_expanded += len(frontier)
        for ages, (cost, _, trace) in frontier.items():
            for d in range(m + 1):
                if d >= 1:
                    new_ages = tuple(
                        0 if thr[i] <= d else ages[i] + 1 for i in range(n)
                    )
                else:
                    new_ages = tuple(a + 1 for a in ages)
                stage = cost + level_costs[d]
                stage = stage + sum(new_ages) / n
                incumbent = nxt.get(new_ages)
                if (
                    incumbent is None
                    or stage < incumbent[0]
                    or (stage == incumbent[0] and (d, trace) < (incumbent[1], incumbent[2]))
                ):
                    nxt[new_ages] = (stage, d, trace + (d,))
        frontier = nxt
    best_cost, _, best_trace = min(
        frontier.values(), key=lambda item: (item[0], item[2])
    )
    return OptResult(
        opt_cost=best_cost,
        decisions=best_trace,
        states_expanded=states_expanded,
        wall_time=time.perf_counter() - start,
    )


def dual_lower_bound(pattern: ChannelPattern, costs: CostSchedule) -> float:
    """Certified lower bound on the offline optimum at any instance size.

    Runs the online covering/packing machine and returns its packing
    objective; a feasible packing value never exceeds the relaxation
    optimum, which never exceeds the integral optimum.
    """
    state = run_primal_dual(pattern, costs)
    return dual_objective(state)
