import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from spde_moments import rng


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=100)
def test_vector_matches_integer_reference(seed, replica, counter):
    keys = rng.stream_keys(seed, np.array([replica], dtype=np.uint64))
    assert rng.uniform(keys, counter)[0] == rng.uniform_scalar(seed, replica, counter)


def test_uniform_in_open_interval():
    keys = rng.stream_keys(7, np.arange(50_000, dtype=np.uint64))
    u = rng.uniform(keys, 3)
    assert u.min() > 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 3 * np.sqrt(1 / 12 / u.size)


def test_normal_moments():
    keys = rng.stream_keys(11, np.arange(200_000, dtype=np.uint64))
    z = rng.normal(keys, 0)
    se = 1 / np.sqrt(z.size)
    assert abs(z.mean()) < 4 * se
    assert abs(z.var() - 1) < 4 * np.sqrt(2) * se


def test_streams_and_counters_differ():
    keys = rng.stream_keys(1, np.arange(1000, dtype=np.uint64))
    a, b = rng.uniform(keys, 0), rng.uniform(keys, 1)
    assert np.corrcoef(a, b)[0, 1] < 0.1
    assert len(np.unique(a)) == a.size
    other = rng.stream_keys(2, np.arange(1000, dtype=np.uint64))
    assert not np.any(rng.uniform(other, 0) == a)
