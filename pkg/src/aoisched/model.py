"""Domain types and exact arithmetic for slotted broadcast scheduling.

Conventions used throughout the package:

* Users are 0-based row indices ``0 .. n_users - 1``.
* Slots are 1-based time indices ``1 .. horizon``; "slot 0" is the initial
  instant at which every age is zero.
* Power level ``0`` means "stay idle".  Levels ``1 .. m_levels`` transmit,
  and a user decodes a transmission exactly when the chosen level is at
  least its per-slot channel threshold.  Level ``m_levels`` always reaches
  every user.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class CostSchedule:
    """Transmission cost per power level; idling (level 0) costs zero.

    Costs must be non-decreasing in the level index and the lowest
    transmission cost must be at least 1: the multiplicative update
    constant derived from the schedule is positive only in that regime.
    """

    costs: tuple[float, ...]

    def __post_init__(self) -> None:
        costs = tuple(float(c) for c in self.costs)
        if len(costs) == 0:
            raise ConfigurationError("a cost schedule needs at least one power level")
        if costs[0] < 1.0:
            raise ConfigurationError(
                f"lowest transmission cost must be >= 1, got {costs[0]!r}; "
                "smaller values make the update constant non-positive"
            )
        if any(hi < lo for lo, hi in zip(costs, costs[1:])):
            raise ConfigurationError("costs must be non-decreasing in the power level")
        object.__setattr__(self, "costs", costs)

    @property
    def m_levels(self) -> int:
        return len(self.costs)

    @property
    def c_min(self) -> float:
        """Cost of the lowest transmitting level."""
        return self.costs[0]

    @property
    def c_max(self) -> float:
        """Cost of the maximum (always decodable) level."""
        return self.costs[-1]

    def cost(self, level: int) -> float:
        """Cost of taking ``level`` for one slot; level 0 is exactly 0."""
        if level == 0:
            return 0.0
        if not 1 <= level <= self.m_levels:
            raise ValueError(f"power level {level} outside [0, {self.m_levels}]")
        return self.costs[level - 1]

    @classmethod
    def linear(cls, c1: float, step: float, m_levels: int) -> "CostSchedule":
        """Schedule with cost ``c1 + step * (k - 1)`` at level ``k``."""
        if m_levels < 1:
            raise ConfigurationError("m_levels must be >= 1")
        return cls(tuple(c1 + step * k for k in range(m_levels)))


@dataclass(frozen=True)
class ChannelPattern:
    """Per-user, per-slot minimum decodable power level.

    ``thresholds[i, t-1]`` is the smallest level at which user ``i``
    decodes in slot ``t``.  Channel state monotonicity (decodable at a
    level implies decodable at every higher level) is exactly what this
    encoding represents, so no per-level bit vectors are stored.
    """

    thresholds: np.ndarray
    m_levels: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.thresholds)
        if arr.ndim != 2:
            raise ConfigurationError("thresholds must be a 2-D (user x slot) array")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.floor(arr)):
                raise ConfigurationError("thresholds must be integers")
        arr = arr.astype(np.int64, copy=True)
        if arr.shape[0] < 1:
            raise ConfigurationError("need at least one user")
        if self.m_levels < 1:
            raise ConfigurationError("m_levels must be >= 1")
        if arr.size and (arr.min() < 1 or arr.max() > self.m_levels):
            raise ConfigurationError(
                f"thresholds must lie in [1, {self.m_levels}]; "
                f"saw range [{arr.min()}, {arr.max()}]"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "thresholds", arr)

    @property
    def n_users(self) -> int:
        return self.thresholds.shape[0]

    @property
    def horizon(self) -> int:
        return self.thresholds.shape[1]

    def _check_slot(self, t: int) -> None:
        if not 1 <= t <= self.horizon:
            raise ValueError(f"slot {t} outside [1, {self.horizon}]")

    def threshold(self, i: int, t: int) -> int:
        if not 0 <= i < self.n_users:
            raise ValueError(f"user {i} outside [0, {self.n_users - 1}]")
        self._check_slot(t)
        return int(self.thresholds[i, t - 1])

    def slot_thresholds(self, t: int) -> np.ndarray:
        """Read-only view of all users' thresholds for slot ``t``."""
        self._check_slot(t)
        return self.thresholds[:, t - 1]

    def to_json_dict(self) -> dict:
        return {
            "n_users": self.n_users,
            "horizon": self.horizon,
            "m_levels": self.m_levels,
            "thresholds": self.thresholds.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ChannelPattern":
        try:
            thresholds = np.asarray(data["thresholds"], dtype=np.int64)
            m_levels = int(data["m_levels"])
            n_users = int(data["n_users"])
            horizon = int(data["horizon"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed channel pattern file: {exc}") from exc
        if thresholds.size == 0:
            thresholds = thresholds.reshape(n_users, horizon)
        if thresholds.shape != (n_users, horizon):
            raise ConfigurationError(
                f"thresholds shape {thresholds.shape} does not match "
                f"(n_users={n_users}, horizon={horizon})"
            )
        return cls(thresholds=thresholds, m_levels=m_levels)


def save_pattern(pattern: ChannelPattern, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pattern.to_json_dict(), fh)


def load_pattern(path) -> ChannelPattern:
    with open(path, encoding="utf-8") as fh:
        return ChannelPattern.from_json_dict(json.load(fh))


def decode_indicator(pattern: ChannelPattern, i: int, k: int, t: int) -> int:
    """1 iff user ``i`` decodes a level-``k`` transmission in slot ``t``.

    Level 0 (idle) delivers nothing and always returns 0.
    """
    if not 0 <= k <= pattern.m_levels:
        raise ValueError(f"power level {k} outside [0, {pattern.m_levels}]")
    if k == 0:
        # still validate the indices for a usage error, matching k >= 1
        pattern.threshold(i, t)
        return 0
    return int(k >= pattern.threshold(i, t))


def k_star(pattern: ChannelPattern, t: int) -> int:
    """Smallest level that reaches every user in slot ``t``.

    With threshold encoding this is the maximum per-user threshold; it
    never exceeds ``m_levels``.
    """
    pattern._check_slot(t)
    return int(pattern.thresholds[:, t - 1].max())


def k_star_all(pattern: ChannelPattern) -> np.ndarray:
    """Vector of ``k_star`` over all slots (empty for a zero horizon)."""
    if pattern.horizon == 0:
        return np.zeros(0, dtype=np.int64)
    return pattern.thresholds.max(axis=0)


@dataclass(frozen=True)
class AgeState:
    """Per-user ages at the end of slot ``t`` (slot 0 is all-zero)."""

    ages: np.ndarray
    t: int = 0

    def __post_init__(self) -> None:
        arr = np.asarray(self.ages, dtype=np.int64).copy()
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("ages must be a non-empty vector")
        if arr.min() < 0:
            raise ValueError("ages must be non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "ages", arr)

    @classmethod
    def initial(cls, n_users: int) -> "AgeState":
        return cls(ages=np.zeros(n_users, dtype=np.int64), t=0)

    @property
    def n_users(self) -> int:
        return self.ages.shape[0]


def resolve_ages(ages: np.ndarray, slot_thresholds: np.ndarray, d: int) -> np.ndarray:
    """End-of-slot ages after taking decision ``d``: reset where the level
    reaches the user, increment elsewhere."""
    if d >= 1:
        decoded = slot_thresholds <= d
        return np.where(decoded, 0, ages + 1)
    return ages + 1


def advance_age(state: AgeState, pattern: ChannelPattern, d: int) -> AgeState:
    """Advance ages one slot under decision ``d``; returns a new state."""
    t = state.t + 1
    if t > pattern.horizon:
        raise ValueError(f"slot {t} beyond horizon {pattern.horizon}")
    if state.n_users != pattern.n_users:
        raise ValueError("age vector and pattern disagree on the user count")
    if not 0 <= d <= pattern.m_levels:
        raise ValueError(f"decision {d} outside [0, {pattern.m_levels}]")
    new_ages = resolve_ages(state.ages, pattern.slot_thresholds(t), d)
    return AgeState(ages=new_ages, t=t)


@dataclass(frozen=True)
class RunResult:
    """Decision trace of one run with its per-slot and aggregate costs."""

    decisions: tuple[int, ...]
    tx_costs: tuple[float, ...]
    avg_age_costs: tuple[float, ...]
    total_cost: float
    time_avg_total_cost: float
    time_avg_age: float

    def summary(self) -> dict:
        return {
            "total_cost": self.total_cost,
            "time_avg_total_cost": self.time_avg_total_cost,
            "time_avg_age": self.time_avg_age,
        }

    def write_csv(self, path) -> None:
        """One row per slot: slot, decision, tx_cost, avg_age_cost."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["slot", "decision", "tx_cost", "avg_age_cost"])
            for idx, (d, tx, age) in enumerate(
                zip(self.decisions, self.tx_costs, self.avg_age_costs)
            ):
                writer.writerow([idx + 1, d, repr(tx), repr(age)])

    def write_summary_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, sort_keys=True)


def total_cost(decisions, pattern: ChannelPattern, costs: CostSchedule) -> RunResult:
    """Replay a decision trace from all-zero ages and accumulate the cost.

    The per-slot cost is the transmission cost of the chosen level plus
    the user-averaged end-of-slot age; the total is the sum over slots.
    Time averages divide by the horizon.
    """
    decisions = [int(d) for d in decisions]
    T = pattern.horizon
    if len(decisions) != T:
        raise ValueError(f"decision trace has {len(decisions)} slots, pattern has {T}")
    if costs.m_levels != pattern.m_levels:
        raise ValueError("cost schedule and pattern disagree on the level count")
    n = pattern.n_users
    ages = np.zeros(n, dtype=np.int64)
    tx_costs: list[float] = []
    age_costs: list[float] = []
    total = 0.0
    for t in range(1, T + 1):
        d = decisions[t - 1]
        if not 0 <= d <= pattern.m_levels:
            raise ValueError(f"decision {d} at slot {t} outside [0, {pattern.m_levels}]")
        ages = resolve_ages(ages, pattern.thresholds[:, t - 1], d)
        tx = costs.cost(d)
        age_cost = int(ages.sum()) / n
        tx_costs.append(tx)
        age_costs.append(age_cost)
        total += tx
        total += age_cost
    time_avg_total = total / T if T else 0.0
    time_avg_age = sum(age_costs) / T if T else 0.0
    return RunResult(
        decisions=tuple(decisions),
        tx_costs=tuple(tx_costs),
        avg_age_costs=tuple(age_costs),
        total_cost=total,
        time_avg_total_cost=time_avg_total,
        time_avg_age=time_avg_age,
    )
