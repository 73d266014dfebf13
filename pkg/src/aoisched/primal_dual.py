"""Online fractional covering/packing state machine with certificates.

Per slot the machine places fractional broadcast mass ``x`` on the single
cheapest level that reaches every user (or on the maximum level when the
channel is not observed).  Packets arrive one per slot; packet ``j`` is
"covered" once the mass accumulated over slots ``j..t`` reaches one.  Each
slot sweeps the packets that may still be uncovered and, for every packet
whose coverage window is still below one, records the remaining deficit
``z``, grows the slot's mass multiplicatively plus an additive kick scaled
by ``1/theta``, and books a packing credit ``y`` of ``1/n_users`` per user.

Two ledgers are maintained alongside: every triggered sweep iteration
raises the covering objective by exactly ``1 + 1/theta`` and the packing
objective by exactly ``1``, which is what the ratio certificates rely on.
The packing objective is a certified lower bound on the offline optimum,
so ``primal <= (1 + 1/theta) * OPT`` follows from the lockstep coupling.

Deficits and credits are equal across users for a fixed (packet, slot)
pair because the swept mass always reaches every user; they are stored
once and fanned out by the accessors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .model import ChannelPattern, CostSchedule

WINDOW_MODES = ("exact", "full", "sqrt")

# A coverage window this close to 1 counts as closed.  The packing-budget
# argument needs the exactly-full boundary to land on the covered branch,
# but the update constant carries float rounding (for floor(c_min) = 1 the
# slot mass is 1/(theta*c), exactly 1 in real arithmetic and one ulp off in
# doubles), so a strict compare against 1.0 can book one credit more than
# the budget allows.  The feasibility checkers run at 1e-9, twice this
# slack, so a deficit skipped inside the band can never read as a
# violation there.
COVERAGE_SLACK = 5e-10


def compute_theta(costs: CostSchedule) -> float:
    """Update constant ``(1 + 1/c_max) ** floor(c_min) - 1``.

    Positive for every valid schedule (``c_min >= 1``); approaches
    ``e - 1`` when all levels cost the same large amount.
    """
    if costs.c_min < 1.0:
        raise ConfigurationError("cost schedules require c_min >= 1")
    return math.expm1(math.floor(costs.c_min) * math.log1p(1.0 / costs.c_max))


@dataclass
class PdState:
    """Mutable sequential state; process slots strictly in order.

    Distinct instances are independent; a single instance must not be
    shared across threads.  ``x_val``/``k_star``/``prefix`` are indexed by
    slot with a sentinel at index 0, so ``prefix[t]`` is the total mass
    placed on slots ``1..t``.
    """

    theta: float
    n_users: int
    x_val: list[float] = field(default_factory=lambda: [0.0])
    k_star: list[int] = field(default_factory=lambda: [0])
    prefix: list[float] = field(default_factory=lambda: [0.0])
    z: dict[tuple[int, int], float] = field(default_factory=dict)
    triggers: list[tuple[int, int]] = field(default_factory=list)
    j_lo: int = 1  # oldest packet whose coverage window is still < 1
    primal: float = 0.0
    dual: float = 0.0
    checks: int = 0  # sweep iterations executed, for work accounting
    trace: list[dict] | None = None

    @property
    def t_done(self) -> int:
        return len(self.x_val) - 1

    def x_value(self, t: int) -> float:
        if not 1 <= t <= self.t_done:
            raise ValueError(f"slot {t} not processed yet")
        return self.x_val[t]

    def z_value(self, i: int, j: int, t: int) -> float:
        """Deficit of packet ``j`` at user ``i`` in slot ``t`` (0 unless triggered)."""
        self._check_user(i)
        return self.z.get((j, t), 0.0)

    def y_value(self, i: int, j: int, t: int) -> float:
        """Packing credit; ``1/n_users`` exactly when (j, t) triggered."""
        self._check_user(i)
        return 1.0 / self.n_users if (j, t) in self.z else 0.0

    def _check_user(self, i: int) -> None:
        if not 0 <= i < self.n_users:
            raise ValueError(f"user {i} outside [0, {self.n_users - 1}]")


def new_pd_state(n_users: int, costs: CostSchedule, *, keep_trace: bool = False) -> PdState:
    if n_users < 1:
        raise ConfigurationError("need at least one user")
    return PdState(
        theta=compute_theta(costs),
        n_users=n_users,
        trace=[] if keep_trace else None,
    )


def pd_step_slot(
    state: PdState,
    slot_thresholds: np.ndarray | None,
    costs: CostSchedule,
    t: int,
    k_override: int | None = None,
    *,
    window: str = "exact",
    additive_sign: float = 1.0,
) -> PdState:
    """Process slot ``t`` given only that slot's thresholds.

    ``k_override`` selects the channel-agnostic variant and must equal the
    maximum level; ``slot_thresholds`` may then be omitted.  ``window``
    picks which packets the sweep visits:

    * ``"exact"``: start at the oldest packet whose window was still below
      one after the previous slot.  Skipped packets provably cannot
      trigger (windows only grow with time and shrink with packet index),
      so the variable trace is identical to the full sweep.
    * ``"full"``: start at packet 1, the straightforward reference loop.
    * ``"sqrt"``: start at ``t - floor(sqrt(c_min))``, the fixed-width
      heuristic window; its equivalence to the full sweep is *measured*
      by the verification suite rather than assumed.

    ``additive_sign`` exists solely as a fault-injection hook for the
    verification suite's mutation check; leave it at 1.0.
    """
    if t != state.t_done + 1:
        raise ValueError(
            f"slots must be processed in order: next slot is {state.t_done + 1}, got {t}"
        )
    if window not in WINDOW_MODES:
        raise ValueError(f"window must be one of {WINDOW_MODES}, got {window!r}")
    if k_override is not None:
        if k_override != costs.m_levels:
            raise ValueError(
                "the channel-agnostic variant always sweeps at the maximum level "
                f"{costs.m_levels}, got override {k_override}"
            )
        k = costs.m_levels
    else:
        if slot_thresholds is None:
            raise ValueError("slot thresholds are required unless the level is overridden")
        col = np.asarray(slot_thresholds)
        if col.shape != (state.n_users,):
            raise ValueError(
                f"expected thresholds for {state.n_users} users, got shape {col.shape}"
            )
        k = int(col.max())
        if not 1 <= k <= costs.m_levels:
            raise ValueError(f"thresholds must lie in [1, {costs.m_levels}]")

    c = costs.cost(k)
    theta = state.theta
    prefix = state.prefix
    base = prefix[t - 1]

    if window == "full":
        j_start = 1
    elif window == "sqrt":
        j_start = max(t - math.floor(math.sqrt(costs.c_min)), 1)
    else:
        j_start = state.j_lo

    x_t = 0.0
    for j in range(j_start, t + 1):
        state.checks += 1
        window_sum = base - prefix[j - 1] + x_t
        if window_sum < 1.0 - COVERAGE_SLACK:
            deficit = 1.0 - window_sum
            state.z[(j, t)] = deficit
            x_t += window_sum / c + additive_sign / (theta * c)
            state.triggers.append((j, t))
            state.dual += 1.0
            state.primal += c * (window_sum / c + additive_sign / (theta * c)) + deficit
            if state.trace is not None:
                state.trace.append(
                    {
                        "t": t,
                        "j": j,
                        "k_star": k,
                        "window_sum_before": window_sum,
                        "x_after": x_t,
                        "primal_so_far": state.primal,
                        "dual_so_far": state.dual,
                    }
                )

    state.x_val.append(x_t)
    state.k_star.append(k)
    prefix.append(base + x_t)
    # Retire packets whose windows closed this slot; windows are
    # non-increasing in the packet index, so the retired set is a prefix.
    # The retirement threshold must match the trigger condition exactly or
    # the exact window mode would diverge from the full sweep.
    while state.j_lo <= t and prefix[t] - prefix[state.j_lo - 1] >= 1.0 - COVERAGE_SLACK:
        state.j_lo += 1
    return state


def pd_step(
    state: PdState,
    pattern: ChannelPattern,
    costs: CostSchedule,
    t: int,
    k_override: int | None = None,
    *,
    window: str = "exact",
    additive_sign: float = 1.0,
) -> PdState:
    """Process slot ``t`` of ``pattern``; see :func:`pd_step_slot`."""
    col = pattern.slot_thresholds(t) if k_override is None else None
    return pd_step_slot(
        state, col, costs, t, k_override, window=window, additive_sign=additive_sign
    )


def run_primal_dual(
    pattern: ChannelPattern,
    costs: CostSchedule,
    *,
    k_override: int | None = None,
    window: str = "exact",
    keep_trace: bool = False,
    additive_sign: float = 1.0,
) -> PdState:
    """Run the state machine over the whole pattern and return the state."""
    state = new_pd_state(pattern.n_users, costs, keep_trace=keep_trace)
    if k_override is not None:
        for t in range(1, pattern.horizon + 1):
            pd_step_slot(
                state, None, costs, t, k_override, window=window, additive_sign=additive_sign
            )
        return state
    for t in range(1, pattern.horizon + 1):
        pd_step_slot(
            state,
            pattern.thresholds[:, t - 1],
            costs,
            t,
            window=window,
            additive_sign=additive_sign,
        )
    return state


@dataclass(frozen=True)
class PdObjectives:
    """Covering (primal) and packing (dual) objective values."""

    primal: float
    dual: float

    @classmethod
    def from_state(cls, state: PdState, costs: CostSchedule) -> "PdObjectives":
        return cls(primal=primal_objective(state, costs), dual=dual_objective(state))


def primal_objective(state: PdState, costs: CostSchedule) -> float:
    """Recompute the covering objective from the stored variables.

    Mass cost plus the user-averaged deficit total; deficits are equal
    across users, so the ``1/n`` average of ``n`` fanned-out copies is the
    stored value itself.
    """
    total = 0.0
    for t in range(1, state.t_done + 1):
        total += costs.cost(state.k_star[t]) * state.x_val[t]
    for value in state.z.values():
        total += value
    return total


def dual_objective(state: PdState) -> float:
    """Recount the packing objective from the trigger log.

    Each trigger books ``n`` credits of ``1/n``, so the objective equals
    the number of triggered (packet, slot) pairs.
    """
    return float(len(state.triggers))


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    witness: tuple | None = None
    message: str = "ok"

    def __bool__(self) -> bool:
        return self.ok


def _z_by_slot(state: PdState) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    by_slot: dict[int, tuple[list[int], list[float]]] = {}
    for (j, t), value in state.z.items():
        by_slot.setdefault(t, ([], []))
        by_slot[t][0].append(j)
        by_slot[t][1].append(value)
    return {
        t: (np.asarray(js, dtype=np.int64), np.asarray(vals))
        for t, (js, vals) in by_slot.items()
    }


def check_primal_feasible(
    state: PdState, pattern: ChannelPattern, tol: float = 1e-9
) -> FeasibilityReport:
    """Verify the covering constraints on the stored variables.

    For every user ``i``, packet ``j`` and slot ``t >= j``, the deficit
    plus the decodable mass accumulated over ``j..t`` must reach one, and
    every stored deficit must be non-negative.  Violations are report
    content, not exceptions.
    """
    T = state.t_done
    if T != pattern.horizon:
        raise ValueError("state and pattern disagree on the horizon")
    for (j, t), value in state.z.items():
        if value < -tol:
            return FeasibilityReport(
                False, ("z_range", j, t, value), f"negative deficit z[{j},{t}] = {value}"
            )
    if T == 0:
        return FeasibilityReport(True)
    x = np.asarray(state.x_val[1:])
    ks = np.asarray(state.k_star[1:])
    z_slot = _z_by_slot(state)
    for i in range(pattern.n_users):
        decodable = ks >= pattern.thresholds[i, :]
        cov = np.concatenate(([0.0], np.cumsum(x * decodable)))
        for t in range(1, T + 1):
            lhs = cov[t] - cov[:t]  # indexed by packet j = 1..t
            if t in z_slot:
                js, vals = z_slot[t]
                mask = js <= t
                lhs = lhs.copy()
                lhs[js[mask] - 1] += vals[mask]
            bad = np.nonzero(lhs < 1.0 - tol)[0]
            if bad.size:
                j = int(bad[0]) + 1
                return FeasibilityReport(
                    False,
                    ("cover", i, j, t, float(lhs[bad[0]])),
                    f"covering constraint below 1 at user {i}, packet {j}, slot {t}: "
                    f"{float(lhs[bad[0]])!r}",
                )
    return FeasibilityReport(True)


def trigger_load(state: PdState) -> np.ndarray:
    """Per-slot packing load: entry ``t-1`` counts triggers with
    ``packet <= t <= slot``.  This is the quantity capped by the packing
    constraints (scaled by the decodable-user fraction)."""
    T = state.t_done
    if T == 0 or not state.triggers:
        return np.zeros(T, dtype=np.int64)
    trig = np.asarray(state.triggers, dtype=np.int64)
    js, taus = trig[:, 0], trig[:, 1]
    return np.asarray(
        [int(((js <= t) & (taus >= t)).sum()) for t in range(1, T + 1)], dtype=np.int64
    )


def check_dual_feasible(
    state: PdState, pattern: ChannelPattern, costs: CostSchedule, tol: float = 1e-9
) -> FeasibilityReport:
    """Verify the packing constraints and credit box bounds.

    For every level ``k`` and slot ``t``, the credits of packets arrived
    by ``t`` that are booked at slot ``t`` or later, summed over the users
    decodable at level ``k``, must not exceed the level cost.  Credits are
    ``1/n`` per user per trigger, so the per-slot sum reduces to the
    decodable-user fraction times the trigger load.
    """
    T = state.t_done
    if T != pattern.horizon:
        raise ValueError("state and pattern disagree on the horizon")
    if len(set(state.triggers)) != len(state.triggers):
        return FeasibilityReport(
            False, ("dup",), "duplicate trigger entries break the credit box bounds"
        )
    if T == 0:
        return FeasibilityReport(True)
    load = trigger_load(state).astype(float)
    n = pattern.n_users
    for k in range(1, costs.m_levels + 1):
        decodable = (pattern.thresholds <= k).sum(axis=0)  # users per slot
        lhs = decodable / n * load
        cap = costs.cost(k)
        bad = np.nonzero(lhs > cap + tol)[0]
        if bad.size:
            t = int(bad[0]) + 1
            return FeasibilityReport(
                False,
                ("pack", k, t, float(lhs[bad[0]]), cap),
                f"packing constraint exceeded at level {k}, slot {t}: "
                f"{float(lhs[bad[0]])!r} > {cap!r}",
            )
    return FeasibilityReport(True)


def dump_trace_jsonl(state: PdState, path) -> None:
    """Write the per-trigger debug records, one JSON object per line."""
    if state.trace is None:
        raise ValueError("state was created without keep_trace=True")
    with open(path, "w", encoding="utf-8") as fh:
        for record in state.trace:
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")
