import numpy as np
import pytest

from aoisched import ChannelPattern, CostSchedule, sample_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_pattern(rows, m_levels):
    return ChannelPattern(np.asarray(rows, dtype=np.int64), m_levels)


def dp_instance(rng, *, n_max=3, t_max=12, m_max=3, c1_range=(1.0, 60.0)):
    return sample_instance(rng, n_max=n_max, t_max=t_max, m_max=m_max, c1_range=c1_range)


@pytest.fixture
def small_instance(rng):
    return sample_instance(rng, n_max=4, t_max=40, m_max=4)


def costs_of(*values):
    return CostSchedule(tuple(float(v) for v in values))
