"""Statistic pipelines: raw per-stage observations to z-scores / LLRs.

A pipeline accumulates one data stream per hypothesis and exposes, at any
stage, the cross-sectional statistic vector together with its exact null
CDF at the current sample size.  The sequential runner only talks to this
interface, so likelihood-ratio streams, one-sample t streams and
case-control t streams all plug into the same boundary engine.
"""

import math

import numpy as np
from scipy import special

from .exceptions import ConfigError, DegenerateSampleError
from .lfdr import oracle_lfdr
from .models import (
    Binomial,
    EmpiricalNullTable,
    Exponential,
    FiniteMixture,
    Gaussian,
    TwoGroupModel,
)

_Z_EPS = 1e-15


def _clip_probs(p):
    return np.clip(p, _Z_EPS, 1.0 - _Z_EPS)


class _AffineLlrNull:
    """Null CDF of a cumulative LLR that is affine in a sufficient statistic.

    llr(x) = slope * T(x) + intercept per observation, with the stage-n sum
    of T having a known null CDF.
    """

    def __init__(self, slope, intercept, sum_cdf, sum_sf, discrete=False):
        self.slope = slope
        self.intercept = intercept
        self._sum_cdf = sum_cdf
        self._sum_sf = sum_sf
        self.discrete = discrete

    def cdf(self, llr, n):
        s = (np.asarray(llr, dtype=float) - n * self.intercept) / self.slope
        if self.discrete:
            # sums land on integers; guard the floor against float fuzz
            s = np.floor(s + 1e-9)
        if self.slope > 0:
            return self._sum_cdf(s, n)
        return self._sum_sf(s, n)

    def sf(self, llr, n):
        return 1.0 - self.cdf(llr, n)


def _analytic_llr_null(model):
    """Return an _AffineLlrNull for the supported simple-vs-simple pairs."""
    f0, f1 = model.null, model.alt
    if isinstance(f0, Gaussian) and isinstance(f1, Gaussian):
        if f0.sd == f1.sd and f0.mean != f1.mean:
            slope = (f1.mean - f0.mean) / f0.sd**2
            intercept = -(f1.mean**2 - f0.mean**2) / (2.0 * f0.sd**2)
            mean, sd = f0.mean, f0.sd

            def cdf(s, n):
                return special.ndtr((s - n * mean) / (sd * math.sqrt(n)))

            return _AffineLlrNull(slope, intercept, cdf, lambda s, n: 1.0 - cdf(s, n))
        if f0.mean == f1.mean and f0.sd != f1.sd:
            slope = 0.5 * (1.0 / f0.sd**2 - 1.0 / f1.sd**2)
            intercept = math.log(f0.sd / f1.sd)
            mu, var0 = f0.mean, f0.sd**2

            def cdf(s, n):
                return special.chdtr(n, np.maximum(s, 0.0) / var0)

            return _AffineLlrNull(slope, intercept, cdf, lambda s, n: 1.0 - cdf(s, n))
    if isinstance(f0, Exponential) and isinstance(f1, Exponential):
        slope = -(f1.rate - f0.rate)
        intercept = math.log(f1.rate / f0.rate)
        rate0 = f0.rate

        def cdf(s, n):
            return special.gammainc(n, rate0 * np.maximum(s, 0.0))

        return _AffineLlrNull(slope, intercept, cdf, lambda s, n: 1.0 - cdf(s, n))
    if isinstance(f0, Binomial) and isinstance(f1, Binomial) and f0.size == f1.size:
        p0, p1, size = f0.p, f1.p, f0.size
        slope = math.log(p1 * (1 - p0) / (p0 * (1 - p1)))
        intercept = size * math.log((1 - p1) / (1 - p0))

        def cdf(k, n):
            return special.bdtr(np.clip(k, -1, size * n), size * n, p0)

        def sf(k, n):
            # P(K >= k) = 1 - P(K <= k - 1)
            return 1.0 - cdf(np.asarray(k) - 1, n)

        return _AffineLlrNull(slope, intercept, cdf, sf, discrete=True)
    return None


class _SimulatedLlrNull:
    """Per-stage empirical null tables for LLRs without a closed-form CDF.

    Maintains one vector of simulated null LLR streams, advanced stage by
    stage, and caches the sorted table for every stage already visited so
    replicates of a Monte Carlo experiment share the tabulation work.
    """

    discrete = False

    def __init__(self, model, draws=100_000, seed=0):
        self.model = model
        self.draws = int(draws)
        self._rng = np.random.default_rng(seed)
        self._cum = np.zeros(self.draws)
        self._stage = 0
        self._tables = {}

    def _table(self, n):
        if n not in self._tables:
            if n < self._stage:
                raise ConfigError("null table cache cannot rewind stages")
            while self._stage < n:
                x = self.model.null.sample(self._rng, self.draws)
                self._cum += self.model.llr(x)
                self._stage += 1
                self._tables[self._stage] = EmpiricalNullTable(self._cum)
        return self._tables[n]

    def cdf(self, llr, n):
        return self._table(n).cdf(llr)

    def sf(self, llr, n):
        return 1.0 - self.cdf(llr, n)


class LlrPipeline:
    """Accumulates per-stream log-likelihood ratios for a known model pair.

    Supports the oracle lfdr directly, and z-scores through the exact null
    CDF of the stage-n cumulative LLR (analytic for gaussian shift, gaussian
    scale, exponential and binomial pairs; tabulated by simulation
    otherwise).  A FiniteMixture alternative is tracked per component so the
    oracle posterior marginalizes a stream-level component assignment.
    """

    default_pilot = 1
    min_stages = 1

    def __init__(self, model: TwoGroupModel, null_table_draws=100_000, null_table_seed=0):
        self.model = model
        self._mixture = isinstance(model.alt, FiniteMixture)
        self._null = None
        if not self._mixture:
            self._null = _analytic_llr_null(model)
            if self._null is None:
                self._null = _SimulatedLlrNull(model, null_table_draws, null_table_seed)
        self.reset(0)

    @property
    def discrete(self):
        return self._null is not None and self._null.discrete

    def reset(self, m):
        self.m = int(m)
        self.n = 0
        if self._mixture:
            k = len(self.model.alt.components)
            self._comp_llr = np.zeros((self.m, k))
        else:
            self._cum = np.zeros(self.m)

    def consume(self, payload):
        x = np.asarray(payload, dtype=float)
        if x.shape != (self.m,):
            raise ConfigError(f"expected a ({self.m},) observation vector, got {x.shape}")
        if self._mixture:
            for j, comp in enumerate(self.model.alt.components):
                self._comp_llr[:, j] += comp.log_density(x) - self.model.null.log_density(x)
        else:
            self._cum += self.model.llr(x)
        self.n += 1

    @property
    def ready(self):
        return self.n >= 1

    @property
    def cum_llr(self):
        """Per-stream cumulative LLR; marginalized over components if mixed."""
        if self._mixture:
            logw = np.log(self.model.alt.weights)
            return special.logsumexp(self._comp_llr + logw, axis=1)
        return self._cum

    def oracle_lfdr(self):
        return oracle_lfdr(self.cum_llr, self.model.pi0)

    def zscores(self):
        if self._mixture:
            raise ConfigError("z-scores need a simple alternative with a known null CDF")
        probs = _clip_probs(self._null.cdf(self._cum, self.n))
        return special.ndtri(probs)

    def pvalues(self, two_sided=False):
        """Upper-tail p-values of the cumulative LLR under the null."""
        if self._mixture:
            raise ConfigError("p-values need a simple alternative with a known null CDF")
        if two_sided:
            raise ConfigError("LLR evidence is one-sided; two-sided p-values undefined")
        return np.clip(self._null.sf(self._cum, self.n), 0.0, 1.0)


class OneSampleTPipeline:
    """One-sample t statistics with a t(n - 1) null, updated incrementally."""

    default_pilot = 3
    min_stages = 2
    discrete = False

    def __init__(self):
        self.reset(0)

    def reset(self, m):
        self.m = int(m)
        self.n = 0
        self._sum = np.zeros(self.m)
        self._sumsq = np.zeros(self.m)

    def consume(self, payload):
        x = np.asarray(payload, dtype=float)
        if x.shape != (self.m,):
            raise ConfigError(f"expected a ({self.m},) observation vector, got {x.shape}")
        self._sum += x
        self._sumsq += x * x
        self.n += 1

    @property
    def ready(self):
        return self.n >= 2

    def statistics(self):
        n = self.n
        if n < 2:
            raise DegenerateSampleError("one-sample t needs n >= 2")
        mean = self._sum / n
        var = (self._sumsq - n * mean * mean) / (n - 1)
        if np.any(var <= 0):
            bad = int(np.argmax(var <= 0))
            raise DegenerateSampleError(f"stream {bad} has zero variance at n={n}")
        return mean / np.sqrt(var / n), n - 1

    def zscores(self):
        stats, df = self.statistics()
        return special.ndtri(_clip_probs(special.stdtr(df, stats)))

    def pvalues(self, two_sided=False):
        stats, df = self.statistics()
        cdf = special.stdtr(df, stats)
        if two_sided:
            return 2.0 * np.minimum(cdf, 1.0 - cdf)
        return 1.0 - cdf


class TwoSampleTPipeline:
    """Case-control two-sample t statistics updated one arm at a time.

    Stage payloads are (case_vec, control_vec) pairs where either entry may
    be None; the null is t with n1 + n2 - 2 degrees of freedom for the
    pooled statistic (the default) or Satterthwaite df with ``welch=True``.
    """

    default_pilot = 3
    min_stages = 2
    discrete = False

    def __init__(self, welch=False):
        self.welch = bool(welch)
        self.reset(0)

    def reset(self, m):
        self.m = int(m)
        self.n_case = 0
        self.n_control = 0
        self._case_sum = np.zeros(self.m)
        self._case_sumsq = np.zeros(self.m)
        self._ctrl_sum = np.zeros(self.m)
        self._ctrl_sumsq = np.zeros(self.m)

    def consume(self, payload):
        case, control = payload
        if case is not None:
            x = np.asarray(case, dtype=float)
            if x.shape != (self.m,):
                raise ConfigError(f"expected a ({self.m},) case vector, got {x.shape}")
            self._case_sum += x
            self._case_sumsq += x * x
            self.n_case += 1
        if control is not None:
            y = np.asarray(control, dtype=float)
            if y.shape != (self.m,):
                raise ConfigError(f"expected a ({self.m},) control vector, got {y.shape}")
            self._ctrl_sum += y
            self._ctrl_sumsq += y * y
            self.n_control += 1

    @property
    def n(self):
        return self.n_case + self.n_control

    @property
    def ready(self):
        return self.n_case >= 2 and self.n_control >= 2

    def statistics(self):
        n1, n2 = self.n_case, self.n_control
        if n1 < 2 or n2 < 2:
            raise DegenerateSampleError("two-sample t needs >= 2 observations per arm")
        mean1 = self._case_sum / n1
        mean2 = self._ctrl_sum / n2
        var1 = (self._case_sumsq - n1 * mean1 * mean1) / (n1 - 1)
        var2 = (self._ctrl_sumsq - n2 * mean2 * mean2) / (n2 - 1)
        var1 = np.maximum(var1, 0.0)
        var2 = np.maximum(var2, 0.0)
        diff = mean1 - mean2
        if self.welch:
            se2 = var1 / n1 + var2 / n2
            if np.any(se2 <= 0):
                bad = int(np.argmax(se2 <= 0))
                raise DegenerateSampleError(f"stream {bad} has zero variance in both arms")
            df = se2**2 / ((var1 / n1) ** 2 / (n1 - 1) + (var2 / n2) ** 2 / (n2 - 1))
            return diff / np.sqrt(se2), df
        pooled = ((n1 - 1) * var1 + (n2 - 1) * var2) / (n1 + n2 - 2)
        if np.any(pooled <= 0):
            bad = int(np.argmax(pooled <= 0))
            raise DegenerateSampleError(f"stream {bad} has zero pooled variance")
        se = np.sqrt(pooled * (1.0 / n1 + 1.0 / n2))
        return diff / se, float(n1 + n2 - 2)

    def zscores(self):
        stats, df = self.statistics()
        return special.ndtri(_clip_probs(special.stdtr(df, stats)))

    def pvalues(self, two_sided=True):
        stats, df = self.statistics()
        cdf = special.stdtr(df, stats)
        if two_sided:
            return 2.0 * np.minimum(cdf, 1.0 - cdf)
        return 1.0 - cdf
