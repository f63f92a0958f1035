"""Sequential multiple test with adaptive lfdr stopping boundaries.

``SequentialLfdrTest`` is the package's primary estimator: it consumes a
stream of stage payloads, recomputes the cross-sectional lfdr vector at
every stage (from the known model for the oracle rule, or from z-scores,
an estimated null proportion and a kernel density estimate for the
data-driven rule), and stops the first time every hypothesis is either
rejectable within the FDR budget or acceptable within the FNR budget.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from sklearn.base import BaseEstimator

from . import boundary
from ._validation import check_level
from .exceptions import ConfigError, DataError
from .lfdr import (
    GaussianKde,
    TwoGroupDensity,
    estimate_pi0_jincai,
    estimate_pi0_storey,
    estimated_lfdr,
)
from .pipelines import LlrPipeline, OneSampleTPipeline, TwoSampleTPipeline

DATA_DRIVEN_MIN_STREAMS = 30

# the data-driven rule holds off boundary evaluation until the cross-section
# carries enough signal for the null-proportion and density estimates to be
# meaningful; a handful of stages is not enough even when the statistic is
# already defined
DATA_DRIVEN_MIN_PILOT = 30


@dataclass(frozen=True)
class SequentialResult:
    """Outcome of one sequential run: when it stopped and what it decided."""

    stopping_time: int
    decisions: np.ndarray
    stopped: bool
    stop_reason: str
    trace: Optional[List[boundary.BoundarySnapshot]] = None


def _payload_iter(X):
    """Normalize fit input into an iterator of stage payloads."""
    if isinstance(X, np.ndarray):
        if X.ndim == 2:
            return iter(X)
        if X.ndim == 3 and X.shape[1] == 2:
            return ((row[0], row[1]) for row in X)
        raise ConfigError(f"cannot interpret array of shape {X.shape} as stage payloads")
    return iter(X)


class SequentialLfdrTest(BaseEstimator):
    """Sequential simultaneous test of m hypotheses with FDR/FNR control.

    Parameters
    ----------
    alpha, beta : float in (0, 1)
        Target false discovery / false nondiscovery rates.
    rule : {"oracle", "data_driven"}
        Oracle uses the exact model posterior; data_driven estimates the
        lfdr vector from z-scores at every stage.
    model : TwoGroupModel, optional
        Required for the oracle rule and for the "llr" statistic.
    statistic : {"llr", "t_one_sample", "t_two_sample"} or pipeline instance
        How raw stage payloads become per-stream statistics.
    pilot : int, optional
        Stages consumed before the first boundary evaluation.  Defaults to
        the statistic's minimum (1 for LLR streams, 3 for t streams) under
        the oracle rule and to at least 30 under the data-driven rule,
        whose cross-sectional estimates need a warm-up.
    max_stages : int
        Safety cap; hitting it flags the result as truncated.
    pi0_method : {"auto", "jin_cai", "storey", "oracle"}
        Null-proportion estimator for the data-driven rule.  "auto" picks
        Storey for discrete statistics and the characteristic-function
        estimator otherwise.
    pi0_lambda : float
        Frequency tuning for the characteristic-function estimator.  The
        running rule defaults to 0.5: tracking the null proportion at
        moderate sample sizes needs a sharper frequency than the 0.1
        default of the one-shot estimator.
    pi0_kernel : {"triangular", "uniform", "none"}
        Smoothing weight for the characteristic-function estimator.
    storey_lambda : float
        Tail threshold for the Storey estimator.
    constrain_density : bool
        Project the kernel density estimate onto the two-group form
        pi0*phi + pi1*g before forming lfdr values (default True); see
        TwoGroupDensity.
    welch : bool
        Use the unpooled two-sample statistic with Satterthwaite df.
    record_trace : bool
        Keep one BoundarySnapshot per evaluated stage on ``trace_``.

    Attributes
    ----------
    decisions_ : (m,) int array of 0/1 rejections, fixed at the final stage.
    stopping_time_ : stage index of the final evaluation.
    stopped_ : whether the adaptive boundary fired (False on data
        exhaustion or truncation, in which case the budget-limited step-up
        rejections of the final stage are reported).
    stop_reason_ : {"boundary", "exhausted", "truncated"}.
    lfdr_, r_, a_, t_lower_, t_upper_, s_, pi0_hat_, trace_ : per-stage
        diagnostics of the final stage.
    """

    def __init__(
        self,
        alpha=0.05,
        beta=0.10,
        rule="data_driven",
        model=None,
        statistic="llr",
        pilot=None,
        max_stages=100_000,
        pi0_method="auto",
        pi0_lambda=0.5,
        pi0_kernel="triangular",
        storey_lambda=0.5,
        constrain_density=True,
        welch=False,
        record_trace=False,
        null_table_draws=100_000,
        null_table_seed=0,
    ):
        self.alpha = alpha
        self.beta = beta
        self.rule = rule
        self.model = model
        self.statistic = statistic
        self.pilot = pilot
        self.max_stages = max_stages
        self.pi0_method = pi0_method
        self.pi0_lambda = pi0_lambda
        self.pi0_kernel = pi0_kernel
        self.storey_lambda = storey_lambda
        self.constrain_density = constrain_density
        self.welch = welch
        self.record_trace = record_trace
        self.null_table_draws = null_table_draws
        self.null_table_seed = null_table_seed

    def _build_pipeline(self):
        if not isinstance(self.statistic, str):
            return self.statistic
        if self.statistic == "llr":
            if self.model is None:
                raise ConfigError("the llr statistic needs a TwoGroupModel")
            return LlrPipeline(
                self.model,
                null_table_draws=self.null_table_draws,
                null_table_seed=self.null_table_seed,
            )
        if self.statistic == "t_one_sample":
            return OneSampleTPipeline()
        if self.statistic == "t_two_sample":
            return TwoSampleTPipeline(welch=self.welch)
        raise ConfigError(f"unknown statistic {self.statistic!r}")

    def _stage_lfdr(self, pipeline):
        """Return (lfdr vector, pi0 for the split, pi0_hat for the trace)."""
        if self.rule == "oracle":
            return pipeline.oracle_lfdr(), self.model.pi0, None
        z = pipeline.zscores()
        if float(np.ptp(z)) < 1e-8:
            # a spread-free cross-section carries no usable signal for the
            # two-group estimate; treat the stage as uninformative rather
            # than letting the density estimate act on numerical noise
            return np.ones(z.size), 1.0, 1.0
        method = self.pi0_method
        if method == "auto":
            method = "storey" if pipeline.discrete else "jin_cai"
        if method == "jin_cai":
            pi0 = estimate_pi0_jincai(z, lam=self.pi0_lambda, kernel=self.pi0_kernel)
        elif method == "storey":
            pi0 = estimate_pi0_storey(pipeline.pvalues(), lam=self.storey_lambda)
        elif method == "oracle":
            if self.model is None:
                raise ConfigError("pi0_method='oracle' needs a model")
            pi0 = self.model.pi0
        else:
            raise ConfigError(f"unknown pi0_method {self.pi0_method!r}")
        density = GaussianKde(z)
        if self.constrain_density:
            density = TwoGroupDensity(density, float(pi0))
        return estimated_lfdr(z, pi0, density), float(pi0), float(pi0)

    def fit(self, X, y=None):
        """Run the sequential test over a stream of stage payloads.

        ``X`` may be an array with stages along axis 0, or any iterable of
        per-stage payloads (vectors for single-stream statistics,
        (case, control) pairs for the two-sample statistic).  Infinite
        generators are fine; consumption stops at the stopping time.
        """
        alpha = check_level(self.alpha, "alpha")
        beta = check_level(self.beta, "beta")
        if self.rule not in ("oracle", "data_driven"):
            raise ConfigError(f"unknown rule {self.rule!r}")
        if self.rule == "oracle" and self.model is None:
            raise ConfigError("the oracle rule needs the true TwoGroupModel")
        pipeline = self._build_pipeline()
        if self.rule == "oracle" and not hasattr(pipeline, "oracle_lfdr"):
            raise ConfigError(
                "the oracle rule needs a likelihood-ratio statistic, not "
                f"{type(pipeline).__name__}"
            )
        if self.pilot is not None:
            pilot = int(self.pilot)
        elif self.rule == "data_driven":
            pilot = max(pipeline.default_pilot, DATA_DRIVEN_MIN_PILOT)
        else:
            pilot = pipeline.default_pilot
        if pilot < 1:
            raise ConfigError(f"pilot must be >= 1, got {pilot}")
        if int(self.max_stages) < pilot:
            raise ConfigError("max_stages must be at least the pilot size")

        payloads = _payload_iter(X)
        trace = [] if self.record_trace else None
        m = None
        stage = 0
        final = None
        lfdr_vec = None
        pi0_split = None
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
                first = payload[0] if isinstance(payload, tuple) else payload
                probe = np.asarray(first if first is not None else payload[1])
                m = probe.shape[-1]
                if self.rule == "data_driven" and m < DATA_DRIVEN_MIN_STREAMS:
                    raise ConfigError(
                        f"the data-driven rule needs m >= {DATA_DRIVEN_MIN_STREAMS} "
                        f"streams for cross-sectional estimation, got {m}"
                    )
                pipeline.reset(m)
            pipeline.consume(payload)
            stage += 1
            if stage < pilot:
                continue
            if stage == pilot and not pipeline.ready:
                raise ConfigError(
                    f"pilot of {pilot} stages leaves the {type(pipeline).__name__} "
                    "without a defined statistic"
                )
            lfdr_vec, pi0_split, pi0_hat = self._stage_lfdr(pipeline)
            final = boundary.evaluate(
                lfdr_vec, alpha, beta, n=stage, pi0_hat=pi0_hat,
                guard_blanket_accept=self.rule == "data_driven",
            )
            if trace is not None:
                trace.append(final)
            if final.stopped:
                stop_reason = "boundary"
                break

        if final is None:
            raise DataError("data exhausted before the pilot stage was reached")

        if stop_reason == "boundary":
            selection = boundary.select_s(final.r, final.a, m, pi0_split, alpha, beta)
            s = selection.s
        else:
            # not stopped: report the budget-limited step-up rejections of
            # the final evaluated stage
            selection = None
            s = final.r
        decisions = boundary.decide(lfdr_vec, s)

        self.n_streams_ = m
        self.pipeline_ = pipeline
        self.stopping_time_ = final.n
        self.decisions_ = decisions
        self.lfdr_ = np.asarray(lfdr_vec)
        self.r_ = final.r
        self.a_ = final.a
        self.t_lower_ = final.t_lower
        self.t_upper_ = final.t_upper
        self.s_ = s
        self.selection_ = selection
        self.pi0_hat_ = final.pi0_hat
        self.stopped_ = stop_reason == "boundary"
        self.stop_reason_ = stop_reason
        self.trace_ = trace
        return self

    def result(self) -> SequentialResult:
        """Package the fitted outcome as a plain result record."""
        return SequentialResult(
            stopping_time=self.stopping_time_,
            decisions=self.decisions_,
            stopped=self.stopped_,
            stop_reason=self.stop_reason_,
            trace=self.trace_,
        )
