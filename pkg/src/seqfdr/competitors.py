"""Competitor procedures: the gap rule, Benjamini-Hochberg, and AdaptZ.

The gap rule is the sequential competitor: it presumes the number of
signals K is known, stops once the gap between the K-th and (K+1)-th
largest cumulative log-likelihood ratios clears a cutoff, and rejects
exactly the top K streams.  BH and AdaptZ are the fixed-sample baselines.
"""

import math

import numpy as np
from sklearn.base import BaseEstimator

from . import boundary
from ._validation import as_float_vector, check_level
from .exceptions import ConfigError, InvalidKError
from .lfdr import GaussianKde, estimate_pi0_jincai, estimated_lfdr
from .models import FiniteMixture
from .pipelines import LlrPipeline
from .sequential import SequentialResult, _payload_iter


def gap_ao_cutoff(k, m, alpha, beta):
    """Theoretical gap-rule cutoff log(K (m - K) / min(alpha, beta))."""
    if not 1 <= k <= m - 1:
        raise InvalidKError(f"k must lie in [1, m - 1], got k={k}, m={m}")
    check_level(alpha, "alpha")
    check_level(beta, "beta")
    return math.log(k * (m - k) / min(alpha, beta))


def bh_decisions(pvalues, alpha):
    """Benjamini-Hochberg step-up rejections at level alpha."""
    p = as_float_vector(pvalues, "pvalues")
    check_level(alpha, "alpha")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    p_sorted = np.sort(p)
    passing = np.nonzero(p_sorted <= alpha * np.arange(1, m + 1) / m)[0]
    if passing.size == 0:
        return np.zeros(m, dtype=np.int8)
    threshold = p_sorted[passing[-1]]
    return (p <= threshold).astype(np.int8)


def adaptz_decisions(lfdrs, alpha):
    """Fixed-sample lfdr step-up: reject the largest prefix with mean <= alpha."""
    return boundary.decide(lfdrs, boundary.reject_count(lfdrs, alpha))


class GapRule(BaseEstimator):
    """Sequential gap rule for a known number of signals.

    Parameters
    ----------
    k : int
        Number of alternatives; the rule rejects exactly k streams.
    model : TwoGroupModel
        Simple null and simple alternative; mixtures are refused because
        the rule needs one likelihood-ratio stream per hypothesis.
    alpha, beta : float
        Levels used for the theoretical cutoff when ``cutoff`` is None.
    cutoff : float, optional
        Explicit gap cutoff (e.g. a simulation-calibrated one).
    max_stages : int
        Safety cap; hitting it flags the fit as truncated.

    Attributes
    ----------
    decisions_, stopping_time_, stopped_, stop_reason_, cutoff_, gap_.
    """

    def __init__(self, k=1, model=None, alpha=0.05, beta=0.10, cutoff=None, max_stages=1_000_000):
        self.k = k
        self.model = model
        self.alpha = alpha
        self.beta = beta
        self.cutoff = cutoff
        self.max_stages = max_stages

    def fit(self, X, y=None):
        if self.model is None:
            raise ConfigError("the gap rule needs the data-generating TwoGroupModel")
        if isinstance(self.model.alt, FiniteMixture):
            raise ConfigError("the gap rule needs simple-vs-simple likelihoods")
        pipeline = LlrPipeline(self.model)
        payloads = _payload_iter(X)
        k = int(self.k)
        m = None
        stage = 0
        gap = math.nan
        stop_reason = None
        while True:
            if stage >= int(self.max_stages):
                stop_reason = "truncated"
                break
            try:
                payload = next(payloads)
            except StopIteration:
                stop_reason = "exhausted"
                break
            if m is None:
                m = np.asarray(payload).shape[-1]
                if not 1 <= k <= m - 1:
                    raise InvalidKError(f"k must lie in [1, m - 1], got k={k}, m={m}")
                cutoff = self.cutoff
                if cutoff is None:
                    cutoff = gap_ao_cutoff(k, m, self.alpha, self.beta)
                self.cutoff_ = float(cutoff)
                pipeline.reset(m)
            pipeline.consume(payload)
            stage += 1
            llr = pipeline.cum_llr
            part = np.partition(llr, (m - k - 1, m - k))
            gap = part[m - k] - part[m - k - 1]
            if gap >= self.cutoff_:
                stop_reason = "boundary"
                break
        if m is None:
            raise ConfigError("no data supplied to the gap rule")

        llr = pipeline.cum_llr
        order = np.argsort(-llr, kind="stable")
        decisions = np.zeros(m, dtype=np.int8)
        decisions[order[:k]] = 1

        self.n_streams_ = m
        self.stopping_time_ = stage
        self.decisions_ = decisions
        self.gap_ = float(gap)
        self.stopped_ = stop_reason == "boundary"
        self.stop_reason_ = stop_reason
        return self

    def result(self) -> SequentialResult:
        return SequentialResult(
            stopping_time=self.stopping_time_,
            decisions=self.decisions_,
            stopped=self.stopped_,
            stop_reason=self.stop_reason_,
        )


class BenjaminiHochberg(BaseEstimator):
    """Fixed-sample BH step-up procedure over a p-value vector."""

    def __init__(self, alpha=0.05):
        self.alpha = alpha

    def fit(self, X, y=None):
        self.decisions_ = bh_decisions(X, self.alpha)
        self.n_rejected_ = int(self.decisions_.sum())
        return self


class AdaptZ(BaseEstimator):
    """Fixed-sample lfdr step-up procedure over a z-score vector.

    Estimates the null proportion and the mixture density from the
    z-scores, forms estimated lfdr values, and rejects the largest prefix
    whose running mean stays within alpha.
    """

    def __init__(self, alpha=0.05, pi0_lambda=0.1, pi0_kernel="triangular"):
        self.alpha = alpha
        self.pi0_lambda = pi0_lambda
        self.pi0_kernel = pi0_kernel

    def fit(self, X, y=None):
        z = as_float_vector(X, "zscores")
        pi0 = estimate_pi0_jincai(z, lam=self.pi0_lambda, kernel=self.pi0_kernel)
        density = GaussianKde(z)
        self.pi0_hat_ = float(pi0)
        self.lfdr_ = estimated_lfdr(z, pi0, density)
        self.decisions_ = adaptz_decisions(self.lfdr_, self.alpha)
        self.n_rejected_ = int(self.decisions_.sum())
        return self
