"""Adaptive stopping-boundary engine.

Given the stage-n lfdr vector, counts how many hypotheses are rejectable
within the FDR budget (ascending prefix means <= alpha) and acceptable
within the FNR budget (descending prefix means of 1 - t <= beta), derives
the adaptive cutoffs, decides whether sampling stops, and, at the stopping
stage, splits the undecided overlap into rejections and acceptances.

Two stopping forms coexist: the count criterion r + a >= m (``stop_check``)
and the cutoff crossing t_lower > t_upper (``operative_stop``).  They agree
for continuous, distinct lfdr values whenever both counts are below m; the
runner uses the cutoff form, which is the conservative direction for
discrete statistics and which treats a blanket acceptance specially (see
``operative_stop``).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import as_float_vector, check_level
from .exceptions import NotStoppedError


def _checked_lfdr(values):
    t = as_float_vector(values, "lfdr values")
    if np.any((t < 0) | (t > 1)) or not np.all(np.isfinite(t)):
        raise ValueError("lfdr values must lie in [0, 1]")
    return t


def _reject_count_sorted(t_sorted, alpha):
    prefix_means = np.cumsum(t_sorted) / np.arange(1, t_sorted.size + 1)
    # prefix means of ascending values are nondecreasing, so the qualifying
    # set is a prefix and its size is the count below the budget
    return int(np.sum(prefix_means <= alpha))


def _accept_count_sorted(t_sorted, beta):
    top_down = 1.0 - t_sorted[::-1]
    prefix_means = np.cumsum(top_down) / np.arange(1, t_sorted.size + 1)
    return int(np.sum(prefix_means <= beta))


def reject_count(lfdrs, alpha):
    """Largest q such that the mean of the q smallest lfdr values is <= alpha."""
    t = _checked_lfdr(lfdrs)
    check_level(alpha, "alpha")
    return _reject_count_sorted(np.sort(t), alpha)


def accept_count(lfdrs, beta):
    """Largest q such that the mean of (1 - t) over the q largest values is <= beta."""
    t = _checked_lfdr(lfdrs)
    check_level(beta, "beta")
    return _accept_count_sorted(np.sort(t), beta)


def cutoffs(lfdrs, r_n, a_n):
    """Adaptive (lower, upper) lfdr cutoffs for a stage with counts r_n, a_n.

    The lower cutoff is the (r_n + 1)-th smallest lfdr, or 1 when everything
    is rejectable; the upper cutoff is the (m - a_n)-th smallest, or 1 when
    everything is acceptable.
    """
    t = np.sort(_checked_lfdr(lfdrs))
    m = t.size
    if not (0 <= r_n <= m and 0 <= a_n <= m):
        raise ValueError(f"counts must lie in [0, m], got r={r_n}, a={a_n}, m={m}")
    t_lower = 1.0 if r_n == m else float(t[r_n])
    t_upper = 1.0 if a_n == m else float(t[m - a_n - 1])
    return t_lower, t_upper


def stop_check(r_n, a_n, m):
    """Count criterion: every hypothesis is rejectable or acceptable.

    For continuous statistics this is equivalent to the lower cutoff
    exceeding the upper one whenever both counts are below m.  The runner
    stops on the cutoff comparison (see ``operative_stop``), which is the
    conservative direction for discrete statistics and keeps sampling alive
    when only the acceptance side has saturated.
    """
    return r_n + a_n >= m


def operative_stop(r_n, a_n, m, t_lower, t_upper, guard_blanket_accept=True):
    """Stopping rule actually used by the sequential runner.

    Stop when the adaptive cutoffs cross (t_lower > t_upper) or when every
    hypothesis is rejectable (r = m).  With ``guard_blanket_accept`` (the
    data-driven default), a stage where only the acceptance count has
    reached m keeps sampling: estimated lfdr values sit at 1 whenever the
    cross-section carries no usable signal yet, so a blanket acceptance is
    indistinguishable from estimator blindness and stopping there would
    forfeit FNR control whenever the true alternative fraction exceeds the
    budget.  Oracle posteriors cannot be blind, so the oracle rule runs
    without the guard and a = m stops immediately (the count criterion).
    """
    if r_n == m:
        return True
    if a_n == m:
        return not guard_blanket_accept
    return t_lower > t_upper


@dataclass(frozen=True)
class SplitSelection:
    """Where the undecided overlap was cut: reject the s smallest lfdr values."""

    s: int
    p1: float
    alpha1: float
    beta1: float
    fallback: bool = False


def select_s(r, a, m, pi0, alpha, beta):
    """Choose the rejection count s in [m - a, r] at the stopping stage.

    The overlap r + a - m is split in proportion to the expected shares of
    false rejections and false acceptances: with per-hypothesis rejection
    probability alpha1 for nulls and acceptance probability beta1 for
    alternatives matched to the (alpha, beta) budgets,
    p1 = pi0 * alpha1 / ((1 - pi0) * beta1) and
    s = (m - a) + floor((r + a - m) * p1), clamped to the admissible range.
    Degenerate alpha1/beta1 (possible for extreme pi0) fall back to s = r,
    which keeps FDR control while maximizing discoveries.
    """
    if not stop_check(r, a, m):
        raise NotStoppedError(f"r + a = {r + a} < m = {m}; boundary has not fired")
    pi0 = float(pi0)
    if not 0.0 < pi0 <= 1.0:
        raise ValueError(f"pi0 must lie in (0, 1], got {pi0}")
    alpha = check_level(alpha, "alpha")
    beta = check_level(beta, "beta")
    lo, hi = m - a, r
    if pi0 == 1.0:
        # an all-null estimate degenerates the split; reject maximally
        # within the FDR budget
        return SplitSelection(s=hi, p1=math.nan, alpha1=math.nan, beta1=math.nan, fallback=True)
    odds0 = pi0 / (1.0 - pi0)
    alpha_odds = alpha / (1.0 - alpha)
    beta_odds = beta / (1.0 - beta)
    alpha1 = (1.0 / odds0 - beta_odds) / (1.0 / alpha_odds - beta_odds)
    beta1 = (odds0 - alpha_odds) / (1.0 / beta_odds - alpha_odds)
    p1 = math.nan
    fallback = alpha1 <= 0.0 or beta1 <= 0.0
    if not fallback:
        p1 = pi0 * alpha1 / ((1.0 - pi0) * beta1)
        fallback = not math.isfinite(p1)
    if fallback:
        s = hi
    else:
        s = lo + math.floor((r + a - m) * p1)
        s = min(max(s, lo), hi)
    return SplitSelection(s=int(s), p1=p1, alpha1=alpha1, beta1=beta1, fallback=fallback)


def decide(lfdrs, s):
    """Reject the hypotheses whose lfdr is <= the s-th smallest value.

    Ties at the threshold move together (the comparison is <=), so the
    rejection set can exceed s only among exactly tied values; s = 0 rejects
    nothing.
    """
    t = _checked_lfdr(lfdrs)
    if not 0 <= s <= t.size:
        raise ValueError(f"s must lie in [0, m], got {s}")
    if s == 0:
        return np.zeros(t.size, dtype=np.int8)
    threshold = np.sort(t)[s - 1]
    return (t <= threshold).astype(np.int8)


def qhat(lfdrs, t):
    """Mean lfdr over the values <= t (0 below the smallest value).

    A nondecreasing, right-continuous step function of t: at the sorted
    value t_(q) it equals the q-term prefix mean, the same quantity the
    reject count thresholds against.
    """
    vals = _checked_lfdr(lfdrs)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    mask = vals <= t
    if not mask.any():
        return 0.0
    return float(vals[mask].mean())


def qhat_prime(lfdrs, t):
    """Mean of (1 - lfdr) over the values >= t (0 above the largest value).

    The nonincreasing, left-continuous counterpart of qhat, thresholded
    against beta by the accept count.
    """
    vals = _checked_lfdr(lfdrs)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    mask = vals >= t
    if not mask.any():
        return 0.0
    return float((1.0 - vals[mask]).mean())


@dataclass(frozen=True)
class BoundarySnapshot:
    """One stage's boundary evaluation."""

    n: int
    r: int
    a: int
    t_lower: float
    t_upper: float
    stopped: bool
    pi0_hat: Optional[float] = None


def evaluate(lfdrs, alpha, beta, n=0, pi0_hat=None, guard_blanket_accept=True):
    """Run one full boundary evaluation on a stage's lfdr vector."""
    t = _checked_lfdr(lfdrs)
    t_sorted = np.sort(t)
    m = t.size
    r = _reject_count_sorted(t_sorted, alpha)
    a = _accept_count_sorted(t_sorted, beta)
    t_lower = 1.0 if r == m else float(t_sorted[r])
    t_upper = 1.0 if a == m else float(t_sorted[m - a - 1])
    return BoundarySnapshot(
        n=n,
        r=r,
        a=a,
        t_lower=t_lower,
        t_upper=t_upper,
        stopped=operative_stop(r, a, m, t_lower, t_upper, guard_blanket_accept),
        pi0_hat=pi0_hat,
    )
