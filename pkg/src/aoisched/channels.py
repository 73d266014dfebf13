"""Channel pattern generators: Markov-modulated chains and adversarial
families.  All generators are deterministic given their seed."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .model import ChannelPattern

ADVERSARIAL_FAMILIES = ("constant", "worst_burst", "correlated_group", "iid_uniform")

# Stand-in transition behavior for experiments: stay with probability 0.7,
# spread the rest evenly.  The real measurement campaign behind the
# stochastic experiments is not recoverable, so every experiment records
# the matrix actually used instead of presenting this one as ground truth.
DEFAULT_STAY_PROBABILITY = 0.7


@dataclass(frozen=True)
class MarkovChannelSpec:
    """Per-user Markov chain over the threshold states ``1..m_levels``.

    ``transition[a, b]`` is the probability of moving from threshold
    ``a+1`` to threshold ``b+1``.  Users evolve independently unless
    ``independent_users`` is false, in which case all users share one
    trajectory (a group moving together).
    """

    m_levels: int
    transition: np.ndarray
    initial: np.ndarray
    seed: int
    independent_users: bool = True

    def __post_init__(self) -> None:
        m = self.m_levels
        if m < 1:
            raise ConfigurationError("m_levels must be >= 1")
        trans = np.asarray(self.transition, dtype=float)
        init = np.asarray(self.initial, dtype=float)
        if trans.shape != (m, m):
            raise ConfigurationError(f"transition matrix must be {m}x{m}, got {trans.shape}")
        if init.shape != (m,):
            raise ConfigurationError(f"initial distribution must have length {m}")
        if trans.min() < 0 or init.min() < 0:
            raise ConfigurationError("probabilities must be non-negative")
        row_sums = trans.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > 1e-12):
            raise ConfigurationError(f"transition rows must sum to 1, got {row_sums}")
        if abs(init.sum() - 1.0) > 1e-12:
            raise ConfigurationError("initial distribution must sum to 1")
        trans = trans.copy()
        init = init.copy()
        trans.flags.writeable = False
        init.flags.writeable = False
        object.__setattr__(self, "transition", trans)
        object.__setattr__(self, "initial", init)

    @classmethod
    def lazy_default(
        cls,
        m_levels: int = 4,
        seed: int = 0,
        stay: float = DEFAULT_STAY_PROBABILITY,
        independent_users: bool = True,
    ) -> "MarkovChannelSpec":
        """The documented stand-in chain with a uniform initial state."""
        if m_levels == 1:
            trans = np.ones((1, 1))
        else:
            off = (1.0 - stay) / (m_levels - 1)
            trans = np.full((m_levels, m_levels), off)
            np.fill_diagonal(trans, stay)
        init = np.full(m_levels, 1.0 / m_levels)
        return cls(
            m_levels=m_levels,
            transition=trans,
            initial=init,
            seed=seed,
            independent_users=independent_users,
        )

    def with_seed(self, seed: int) -> "MarkovChannelSpec":
        return replace(self, seed=seed)

    def to_json_dict(self) -> dict:
        return {
            "m_levels": self.m_levels,
            "transition": self.transition.tolist(),
            "initial": self.initial.tolist(),
            "seed": self.seed,
            "independent_users": self.independent_users,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MarkovChannelSpec":
        try:
            return cls(
                m_levels=int(data["m_levels"]),
                transition=np.asarray(data["transition"], dtype=float),
                initial=np.asarray(data["initial"], dtype=float),
                seed=int(data["seed"]),
                independent_users=bool(data.get("independent_users", True)),
            )
        except KeyError as exc:
            raise ConfigurationError(f"channel spec missing key: {exc}") from exc


def save_markov_spec(spec: MarkovChannelSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_json_dict(), fh)


def load_markov_spec(path) -> MarkovChannelSpec:
    with open(path, encoding="utf-8") as fh:
        return MarkovChannelSpec.from_json_dict(json.load(fh))


def gen_markov(spec: MarkovChannelSpec, n_users: int, horizon: int) -> ChannelPattern:
    """Sample threshold trajectories from the chain, one per user."""
    if n_users < 1 or horizon < 0:
        raise ConfigurationError("need n_users >= 1 and horizon >= 0")
    rng = np.random.default_rng(spec.seed)
    walkers = n_users if spec.independent_users else 1
    init_cum = spec.initial.cumsum()
    trans_cum = spec.transition.cumsum(axis=1)
    states = (rng.random(walkers)[:, None] > init_cum[None, :]).sum(axis=1)
    out = np.empty((walkers, horizon), dtype=np.int64)
    for t in range(horizon):
        out[:, t] = states + 1
        draws = rng.random(walkers)
        states = (draws[:, None] > trans_cum[states]).sum(axis=1)
    if not spec.independent_users:
        out = np.repeat(out, n_users, axis=0)
    return ChannelPattern(thresholds=out, m_levels=spec.m_levels)


def gen_adversarial(
    family: str, params: dict | None, n_users: int, horizon: int, seed: int
) -> ChannelPattern:
    """Structured pattern families for worst-case style experiments.

    ``params`` must carry ``m_levels`` plus family-specific knobs:
    ``constant`` takes ``level``; ``worst_burst`` takes ``burst_len`` and
    ``low_level`` (alternating runs at the maximum level and a benign
    level); the rest take nothing extra.
    """
    params = dict(params or {})
    if n_users < 1 or horizon < 0:
        raise ConfigurationError("need n_users >= 1 and horizon >= 0")
    try:
        m = int(params.pop("m_levels"))
    except KeyError:
        raise ConfigurationError("adversarial params must include m_levels") from None
    rng = np.random.default_rng(seed)

    if family == "constant":
        level = int(params.pop("level", 1))
        if not 1 <= level <= m:
            raise ConfigurationError(f"constant level {level} outside [1, {m}]")
        thresholds = np.full((n_users, horizon), level, dtype=np.int64)
    elif family == "worst_burst":
        burst = int(params.pop("burst_len", 10))
        low = int(params.pop("low_level", 1))
        if burst < 1:
            raise ConfigurationError("burst_len must be >= 1")
        if not 1 <= low <= m:
            raise ConfigurationError(f"low_level {low} outside [1, {m}]")
        slots = np.arange(horizon)
        row = np.where((slots // burst) % 2 == 0, m, low)
        thresholds = np.tile(row, (n_users, 1)).astype(np.int64)
    elif family == "correlated_group":
        row = rng.integers(1, m + 1, size=horizon)
        thresholds = np.tile(row, (n_users, 1)).astype(np.int64)
    elif family == "iid_uniform":
        thresholds = rng.integers(1, m + 1, size=(n_users, horizon)).astype(np.int64)
    else:
        raise ValueError(
            f"unknown adversarial family {family!r}; choose from {ADVERSARIAL_FAMILIES}"
        )
    if params:
        raise ConfigurationError(f"unused adversarial params: {sorted(params)}")
    return ChannelPattern(thresholds=thresholds, m_levels=m)
