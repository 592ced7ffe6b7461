import numpy as np

from slamopt import rng


def test_streams_are_reproducible_and_distinct():
    a = rng.stream(7, rng.ALGORITHM).standard_normal(4)
    b = rng.stream(7, rng.ALGORITHM).standard_normal(4)
    c = rng.stream(7, rng.METRICS).standard_normal(4)
    d = rng.stream(8, rng.ALGORITHM).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_derived_seeds_distinct():
    seeds = {rng.derived_seed(0, rng.TUNING, i) for i in range(100)}
    assert len(seeds) == 100
