import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ragft import rlgr
from ragft.errors import TruncatedStreamError


def test_zigzag():
    np.testing.assert_array_equal(rlgr.zigzag([0, -1, 1, -2, 2]), [0, 1, 2, 3, 4])
    np.testing.assert_array_equal(rlgr.unzigzag([0, 1, 2, 3, 4]), [0, -1, 1, -2, 2])


@given(st.lists(st.integers(-(2**40), 2**40), max_size=300))
def test_roundtrip_wide_range(values):
    np.testing.assert_array_equal(rlgr.decode(rlgr.encode(values), len(values)), values)


@given(st.lists(st.sampled_from([0] * 12 + [1, -1, 2, -3, 70]), max_size=2000))
def test_roundtrip_sparse(values):
    np.testing.assert_array_equal(rlgr.decode(rlgr.encode(values), len(values)), values)


def test_empty_and_zero_runs():
    assert rlgr.encode([]) == b""
    assert len(rlgr.decode(b"", 0)) == 0
    for n in (1, 2, 3, 7, 100, 10_000):
        data = rlgr.encode(np.zeros(n, dtype=int))
        np.testing.assert_array_equal(rlgr.decode(data, n), 0)
    assert len(rlgr.encode(np.zeros(10_000, dtype=int))) < 40


def test_laplacian_source_is_compressed(rng):
    x = np.rint(rng.laplace(0, 3, 20_000)).astype(int)
    data = rlgr.encode(x)
    assert 8 * len(data) / len(x) < 5.0
    np.testing.assert_array_equal(rlgr.decode(data, len(x)), x)


def test_truncated_stream():
    data = rlgr.encode([5, -7, 300, 2, 0, 9])
    with pytest.raises(TruncatedStreamError):
        rlgr.decode(data[:-1], 6)
    with pytest.raises(ValueError):
        rlgr.decode(data, -1)


def test_deterministic():
    v = list(range(-50, 50)) * 3
    assert rlgr.encode(v) == rlgr.encode(v)
