import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqfdr.exceptions import DimensionError
from seqfdr.metrics import ErrorCounts, error_counts, fdp, fnp


def brute_counts(theta, delta):
    v = sum(1 for t, d in zip(theta, delta) if t == 0 and d == 1)
    r = sum(delta)
    w = sum(1 for t, d in zip(theta, delta) if t == 1 and d == 0)
    return v, r, w


def test_error_counts_basic():
    c = error_counts([0, 1, 0], [1, 1, 0])
    assert (c.v, c.r, c.w) == (1, 2, 0)


def test_error_counts_all_accept():
    c = error_counts([1, 1], [0, 0])
    assert (c.v, c.r, c.w) == (0, 0, 2)


def test_error_counts_enumerated():
    c = error_counts([0, 0, 1, 1], [1, 0, 1, 0])
    assert (c.v, c.r, c.w) == (1, 2, 1)


def test_error_counts_length_mismatch():
    with pytest.raises(DimensionError):
        error_counts([0, 1], [1, 1, 0])


def test_error_counts_rejects_nonbinary():
    with pytest.raises(ValueError):
        error_counts([0, 2], [1, 0])


def test_fdp_values():
    assert fdp(ErrorCounts(v=1, r=2, w=0, m=3)) == 0.5
    assert fdp(ErrorCounts(v=0, r=0, w=1, m=3)) == 0.0
    assert fdp(ErrorCounts(v=3, r=10, w=0, m=12)) == pytest.approx(0.3)


def test_fnp_values():
    assert fnp(ErrorCounts(v=0, r=0, w=0, m=5)) == 0.0
    # all-reject: denominator guarded by max(., 1)
    assert fnp(ErrorCounts(v=2, r=5, w=0, m=5)) == 0.0
    assert fnp(ErrorCounts(v=0, r=2, w=1, m=4)) == 0.5


def test_counts_invariants_rejected():
    with pytest.raises(ValueError):
        ErrorCounts(v=3, r=2, w=0, m=5)
    with pytest.raises(ValueError):
        ErrorCounts(v=0, r=3, w=3, m=5)


@given(
    st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=20)
)
@settings(max_examples=200, deadline=None)
def test_against_brute_force(pairs):
    theta = [t for t, _ in pairs]
    delta = [d for _, d in pairs]
    c = error_counts(theta, delta)
    v, r, w = brute_counts(theta, delta)
    assert (c.v, c.r, c.w, c.m) == (v, r, w, len(pairs))
    assert 0.0 <= fdp(c) <= 1.0
    assert 0.0 <= fnp(c) <= 1.0
    if r == 0:
        assert fdp(c) == 0.0
    if r == c.m:
        assert fnp(c) == 0.0


def test_random_pairs_match_loop():
    rng = np.random.default_rng(0)
    for _ in range(100):
        m = rng.integers(1, 21)
        theta = rng.integers(0, 2, m)
        delta = rng.integers(0, 2, m)
        c = error_counts(theta, delta)
        assert (c.v, c.r, c.w) == brute_counts(theta.tolist(), delta.tolist())
