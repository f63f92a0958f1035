import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqfdr import boundary
from seqfdr.boundary import (
    accept_count,
    cutoffs,
    decide,
    evaluate,
    qhat,
    qhat_prime,
    reject_count,
    select_s,
    stop_check,
)
from seqfdr.exceptions import NotStoppedError


class TestRejectCount:
    def test_prefix_mean_threshold(self):
        assert reject_count([0.01, 0.03, 0.20, 0.9], 0.05) == 2

    def test_smallest_value_exceeds_alpha(self):
        assert reject_count([0.2, 0.3], 0.05) == 0

    def test_all_zero(self):
        assert reject_count([0.0, 0.0, 0.0], 0.05) == 3


class TestAcceptCount:
    def test_prefix_mean_from_top(self):
        assert accept_count([0.01, 0.03, 0.95, 0.99], 0.1) == 2

    def test_largest_value_below_threshold(self):
        assert accept_count([0.5, 0.6], 0.1) == 0

    def test_all_one(self):
        assert accept_count([1.0, 1.0], 0.1) == 2


class TestCutoffs:
    def test_index_arithmetic(self):
        t = [0.01, 0.03, 0.20, 0.9]
        assert cutoffs(t, 2, 1) == (0.20, 0.20)

    def test_all_rejectable(self):
        t_lower, _ = cutoffs([0.0, 0.0], 2, 0)
        assert t_lower == 1.0

    def test_all_acceptable(self):
        _, t_upper = cutoffs([1.0, 1.0], 0, 2)
        assert t_upper == 1.0

    def test_crossed(self):
        assert cutoffs([0.01, 0.99], 1, 1) == (0.99, 0.01)


class TestStopping:
    def test_count_criterion(self):
        assert stop_check(2, 2, 4)
        assert not stop_check(0, 0, 1)
        assert stop_check(3, 2, 4)

    def test_operative_requires_crossing(self):
        # blanket acceptance alone does not fire the operative rule
        snap = evaluate(np.full(5, 1.0), 0.05, 0.10)
        assert snap.a == 5 and not snap.stopped
        # full rejection does
        snap = evaluate(np.zeros(5), 0.05, 0.10)
        assert snap.r == 5 and snap.stopped


class TestSelectS:
    def test_discussion_formulas(self):
        sel = select_s(r=10, a=95, m=100, pi0=0.8, alpha=0.05, beta=0.10)
        assert sel.alpha1 == pytest.approx(0.0073529, abs=1e-7)
        assert sel.beta1 == pytest.approx(0.4411765, abs=1e-7)
        assert sel.p1 == pytest.approx(1 / 15)

    def test_unique_decision(self):
        sel = select_s(r=3, a=7, m=10, pi0=0.8, alpha=0.05, beta=0.10)
        assert sel.s == 3  # r + a = m forces s = r = m - a

    def test_clamped_interpolation(self):
        # gap of 2 at p1 = 1/15 adds nothing beyond the floor
        sel = select_s(r=5, a=97, m=100, pi0=0.8, alpha=0.05, beta=0.10)
        assert sel.s == 3

    def test_dense_case_clamps_to_r(self):
        # pi0 = 0.2 makes p1 > 1, so s clamps at the rejection count
        sel = select_s(r=80, a=30, m=100, pi0=0.2, alpha=0.05, beta=0.10)
        assert sel.s == 80

    def test_pi0_one_falls_back(self):
        sel = select_s(r=4, a=8, m=10, pi0=1.0, alpha=0.05, beta=0.10)
        assert sel.fallback and sel.s == 4

    def test_not_stopped_error(self):
        with pytest.raises(NotStoppedError):
            select_s(r=1, a=1, m=10, pi0=0.8, alpha=0.05, beta=0.10)


class TestDecide:
    def test_threshold(self):
        np.testing.assert_array_equal(decide([0.3, 0.1, 0.9], 2), [1, 1, 0])

    def test_s_zero(self):
        np.testing.assert_array_equal(decide([0.3, 0.1], 0), [0, 0])

    def test_s_full(self):
        np.testing.assert_array_equal(decide([0.3, 0.1], 2), [1, 1])

    def test_ties_move_together(self):
        np.testing.assert_array_equal(decide([0.2, 0.2, 0.2, 0.9], 1), [1, 1, 1, 0])


class TestQhat:
    def test_below_minimum(self):
        assert qhat([0.1, 0.2], 0.05) == 0.0

    def test_direct_mean(self):
        assert qhat([0.01, 0.03, 0.2], 0.05) == pytest.approx(0.02)

    def test_full_set(self):
        assert qhat([0.01, 0.03, 0.2], 1.0) == pytest.approx(0.08)

    def test_prime_above_maximum(self):
        assert qhat_prime([0.1, 0.2], 0.3) == 0.0

    def test_prime_direct_mean(self):
        assert qhat_prime([0.9, 0.95], 0.92) == pytest.approx(0.05)

    def test_prime_full_set(self):
        assert qhat_prime([0.9, 0.95], 0.0) == pytest.approx(0.075)


def random_lfdr_vectors(seed, count, max_m=50):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        m = int(rng.integers(1, max_m + 1))
        yield rng.random(m)


class TestLemmaEquivalences:
    def test_stop_equivalence_on_distinct_vectors(self):
        # for distinct continuous values with both counts below m, the count
        # criterion and the cutoff crossing agree
        alpha, beta = 0.05, 0.10
        checked = 0
        for t in random_lfdr_vectors(0, 2000):
            r = reject_count(t, alpha)
            a = accept_count(t, beta)
            t_lower, t_upper = cutoffs(t, r, a)
            if r < t.size and a < t.size:
                assert stop_check(r, a, t.size) == (t_lower > t_upper)
                checked += 1
            elif r == t.size:
                assert t_lower == 1.0 and stop_check(r, a, t.size)
        assert checked > 1500

    def test_qhat_sublevel_sup_equals_lower_cutoff(self):
        # sup{t : qhat(t) <= alpha} computed by scanning the sorted values
        # must equal the lower cutoff exactly
        alpha, beta = 0.05, 0.10
        for t in random_lfdr_vectors(1, 400):
            r = reject_count(t, alpha)
            a = accept_count(t, beta)
            t_lower, t_upper = cutoffs(t, r, a)
            t_sorted = np.sort(t)
            over = [v for v in t_sorted if qhat(t, v) > alpha]
            sup = over[0] if over else 1.0
            assert sup == t_lower

    def test_qhat_prime_sublevel_inf_equals_upper_cutoff(self):
        alpha, beta = 0.05, 0.10
        for t in random_lfdr_vectors(2, 400):
            r = reject_count(t, alpha)
            a = accept_count(t, beta)
            _, t_upper = cutoffs(t, r, a)
            t_sorted = np.sort(t)[::-1]
            over = [v for v in t_sorted if qhat_prime(t, v) > beta]
            inf = over[0] if over else 0.0
            if a < t.size:
                assert inf == t_upper

    def test_qhat_monotone_right_continuous(self):
        eps = 1e-9
        for t in random_lfdr_vectors(3, 200):
            points = np.sort(np.concatenate([t, [0.0, 1.0]]))
            vals = [qhat(t, p) for p in points]
            assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
            for p in t:
                if p + eps <= 1.0:
                    assert qhat(t, p + eps) == pytest.approx(qhat(t, p), abs=1e-9)

    def test_qhat_prime_monotone_left_continuous(self):
        eps = 1e-9
        for t in random_lfdr_vectors(4, 200):
            points = np.sort(np.concatenate([t, [0.0, 1.0]]))
            vals = [qhat_prime(t, p) for p in points]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
            for p in t:
                if p - eps >= 0.0:
                    assert qhat_prime(t, p - eps) == pytest.approx(
                        qhat_prime(t, p), abs=1e-9
                    )

    def test_prefix_means_nondecreasing(self):
        for t in random_lfdr_vectors(5, 200):
            t_sorted = np.sort(t)
            pm = np.cumsum(t_sorted) / np.arange(1, t.size + 1)
            assert np.all(np.diff(pm) >= -1e-15)

    def test_rejected_set_mean_within_budget(self):
        alpha = 0.05
        for t in random_lfdr_vectors(6, 500):
            r = reject_count(t, alpha)
            d = decide(t, r)
            if d.sum():
                assert t[d.astype(bool)].mean() <= alpha + 1e-12


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40))
@settings(max_examples=200, deadline=None)
def test_counts_bounded_and_consistent(values):
    t = np.asarray(values)
    r = reject_count(t, 0.05)
    a = accept_count(t, 0.10)
    assert 0 <= r <= t.size
    assert 0 <= a <= t.size
    t_lower, t_upper = cutoffs(t, r, a)
    assert 0.0 <= t_lower <= 1.0
    assert 0.0 <= t_upper <= 1.0
    # the cutoff crossing always implies the count criterion
    if r < t.size and a < t.size and t_lower > t_upper:
        assert r + a >= t.size
