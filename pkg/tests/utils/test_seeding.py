import numpy as np
import pytest

from src.utils.seeding import derive_int_seed, derive_rng


def test_same_keys_same_stream():
    a = derive_rng(7, "trial", 3).standard_normal(5)
    b = derive_rng(7, "trial", 3).standard_normal(5)
    assert np.array_equal(a, b)


def test_streams_are_separated():
    base = derive_rng(7, "trial", 3).standard_normal(5)
    for other in (derive_rng(8, "trial", 3), derive_rng(7, "trial", 4), derive_rng(7, "folds", 3)):
        assert not np.array_equal(base, other.standard_normal(5))


def test_int_seed_is_stable_and_bounded():
    s = derive_int_seed(0, "folds", 1, 2, 3)
    assert s == derive_int_seed(0, "folds", 1, 2, 3)
    assert 0 <= s < 2**32


def test_bad_arguments():
    with pytest.raises(KeyError):
        derive_rng(0, "weights")
    with pytest.raises(ValueError):
        derive_rng(-1, "trial")
