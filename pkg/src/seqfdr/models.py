"""Per-observation distribution models and test-statistic primitives.

The two-group model pairs a null and an alternative distribution with a null
proportion; everything downstream (likelihood ratios, oracle local-fdr
values, z-score transforms) is built from these pieces.  Distributions are
lightweight objects exposing vectorized ``log_density`` / ``cdf`` / ``sample``
so the simulation harness can stay in numpy throughout.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from ._validation import check_level, check_positive
from .exceptions import DegenerateSampleError

# log of the largest double; accumulated log-likelihood ratios saturate here
# instead of propagating infinities.
LLR_SATURATION = 709.0

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Gaussian:
    def __init__(self, mean=0.0, sd=1.0):
        self.mean = float(mean)
        self.sd = check_positive(sd, "sd")

    def log_density(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return -0.5 * z * z - math.log(self.sd) - _LOG_SQRT_2PI

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def sample(self, rng, size):
        return rng.normal(self.mean, self.sd, size)

    def __repr__(self):
        return f"Gaussian(mean={self.mean}, sd={self.sd})"


class Exponential:
    """Exponential with rate parameter (density rate * exp(-rate * x), x >= 0)."""

    def __init__(self, rate=1.0):
        self.rate = check_positive(rate, "rate")

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        out = math.log(self.rate) - self.rate * x
        return np.where(x >= 0.0, out, -np.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, -np.expm1(-self.rate * x), 0.0)

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def __repr__(self):
        return f"Exponential(rate={self.rate})"


class Binomial:
    """Binomial counts on a fixed number of trials; the one discrete family."""

    discrete = True

    def __init__(self, size=1, p=0.5):
        if int(size) < 1:
            raise ValueError(f"size must be >= 1, got {size}")
        self.size = int(size)
        if not 0.0 <= float(p) <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p}")
        self.p = float(p)

    def log_density(self, x):
        k = np.asarray(x, dtype=float)
        n, p = self.size, self.p
        with np.errstate(divide="ignore"):
            logpmf = (
                special.gammaln(n + 1)
                - special.gammaln(k + 1)
                - special.gammaln(n - k + 1)
                + special.xlogy(k, p)
                + special.xlog1py(n - k, -p)
            )
        in_support = (k >= 0) & (k <= n) & (k == np.round(k))
        return np.where(in_support, logpmf, -np.inf)

    def cdf(self, x):
        k = np.floor(np.asarray(x, dtype=float))
        out = np.where(k >= 0, special.bdtr(np.clip(k, 0, self.size), self.size, self.p), 0.0)
        return np.where(k >= self.size, 1.0, out)

    def sample(self, rng, size):
        return rng.binomial(self.size, self.p, size).astype(float)

    def __repr__(self):
        return f"Binomial(size={self.size}, p={self.p})"


class Cauchy:
    def __init__(self, loc=0.0, scale=1.0):
        self.loc = float(loc)
        self.scale = check_positive(scale, "scale")

    def log_density(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return -np.log1p(z * z) - math.log(math.pi * self.scale)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return 0.5 + np.arctan(z) / math.pi

    def sample(self, rng, size):
        return self.loc + self.scale * rng.standard_cauchy(size)

    def __repr__(self):
        return f"Cauchy(loc={self.loc}, scale={self.scale})"


class FiniteMixture:
    """Finite mixture of component distributions.

    ``log_density`` and ``cdf`` describe the marginal (observation-level)
    mixture.  Stream-level component assignment, where one component is drawn
    per stream and then held fixed, is handled by the data generators.
    """

    def __init__(self, weights, components):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or len(components) != weights.size:
            raise ValueError("need one weight per component")
        if np.any(weights < 0) or not math.isclose(weights.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("weights must be nonnegative and sum to 1")
        self.weights = weights
        self.components = list(components)

    def log_density(self, x):
        parts = np.stack([c.log_density(x) for c in self.components])
        logw = np.log(self.weights).reshape((-1,) + (1,) * (parts.ndim - 1))
        return special.logsumexp(parts + logw, axis=0)

    def cdf(self, x):
        parts = np.stack([c.cdf(x) for c in self.components])
        return np.tensordot(self.weights, parts, axes=(0, 0))

    def sample(self, rng, size):
        flat = int(np.prod(size)) if not np.isscalar(size) else int(size)
        picks = rng.choice(len(self.components), size=flat, p=self.weights)
        out = np.empty(flat, dtype=float)
        for idx, comp in enumerate(self.components):
            mask = picks == idx
            if mask.any():
                out[mask] = np.asarray(comp.sample(rng, int(mask.sum()))).ravel()
        return out.reshape(size)

    def __repr__(self):
        return f"FiniteMixture(weights={self.weights.tolist()}, components={self.components})"


class EmpiricalNullTable:
    """Null CDF tabulated from simulated statistics.

    The CDF is the interpolated empirical CDF with continuity correction:
    the k-th sorted value (0-based) maps to (k + 0.5) / (draws + 1), queries
    outside the table clamp to the end plateaus.
    """

    def __init__(self, values):
        table = np.sort(np.asarray(values, dtype=float))
        if table.size < 2:
            raise ValueError("empirical table needs at least 2 values")
        self.table = table
        self._probs = (np.arange(table.size) + 0.5) / (table.size + 1.0)

    @property
    def draws(self):
        return self.table.size

    def cdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.table, self._probs)

    def quantile(self, q):
        return np.interp(np.asarray(q, dtype=float), self._probs, self.table)

    def __repr__(self):
        return f"EmpiricalNullTable(draws={self.draws})"


class TwoGroupModel:
    """Two-group mixture: each stream is null with probability pi0.

    Parameters
    ----------
    pi0 : float in (0, 1)
        Null proportion.
    null, alt : distribution objects
        Per-observation densities under the null / alternative.  ``alt`` may
        be a FiniteMixture.
    """

    def __init__(self, pi0, null, alt):
        self.pi0 = check_level(pi0, "pi0")
        self.null = null
        self.alt = alt

    @property
    def pi1(self):
        return 1.0 - self.pi0

    def llr(self, x):
        """Observation-level log-likelihood ratio log f1(x) - log f0(x)."""
        return np.asarray(self.alt.log_density(x) - self.null.log_density(x))

    def marginal_density(self, x):
        return self.pi0 * np.exp(self.null.log_density(x)) + self.pi1 * np.exp(
            self.alt.log_density(x)
        )

    def __repr__(self):
        return f"TwoGroupModel(pi0={self.pi0}, null={self.null!r}, alt={self.alt!r})"


@dataclass(frozen=True)
class StreamState:
    """Accumulated evidence for a single hypothesis stream."""

    stream_id: int = 0
    n: int = 0
    cum_llr: float = 0.0
    stat: float = 0.0
    saturated: bool = False


def update_llr(state: StreamState, model: TwoGroupModel, x) -> StreamState:
    """Fold one observation into a stream's accumulated log-likelihood ratio.

    A zero density under exactly one hypothesis would push the ratio to
    +/-inf; instead the cumulative value saturates at +/-709 and the state is
    flagged, so downstream local-fdr values degrade to exactly 0 or 1.
    """
    inc = float(model.llr(x))
    saturated = state.saturated
    if math.isnan(inc):
        # outside both supports: no evidence either way, but flag it
        inc = 0.0
        saturated = True
    elif math.isinf(inc):
        inc = math.copysign(LLR_SATURATION, inc)
        saturated = True
    cum = float(np.clip(state.cum_llr + inc, -LLR_SATURATION, LLR_SATURATION))
    return replace(state, n=state.n + 1, cum_llr=cum, stat=cum, saturated=saturated)


def zscore(stat, null_cdf, eps=1e-15):
    """Map a statistic through its null CDF onto the standard normal scale.

    ``null_cdf`` is anything with a ``cdf`` method or a plain callable.  CDF
    values are clamped to [eps, 1 - eps] before inversion so saturated
    statistics produce large finite z-scores.
    """
    stat = np.asarray(stat, dtype=float)
    if not np.all(np.isfinite(stat)):
        raise ValueError("statistic must be finite to compute a z-score")
    cdf = null_cdf.cdf if hasattr(null_cdf, "cdf") else null_cdf
    probs = np.clip(np.asarray(cdf(stat), dtype=float), eps, 1.0 - eps)
    return special.ndtri(probs)


def empirical_null_cdf(model, statistic, draws, seed, n_obs=1):
    """Tabulate the null distribution of a statistic by simulation.

    Draws ``draws`` independent null streams of length ``n_obs`` from the
    model's null distribution, applies ``statistic`` row-wise (it receives a
    (draws, n_obs) array and must return a (draws,) vector), and returns the
    sorted table wrapped as an EmpiricalNullTable.
    """
    if draws < 1000:
        raise ValueError(f"draws must be >= 1000 for a usable table, got {draws}")
    rng = np.random.default_rng(seed)
    sample = np.asarray(model.null.sample(rng, (int(draws), int(n_obs))))
    stats = np.asarray(statistic(sample), dtype=float)
    if stats.shape != (int(draws),):
        raise ValueError("statistic must map (draws, n_obs) to (draws,)")
    return EmpiricalNullTable(stats)


def one_sample_t(x):
    """One-sample t statistic and its null degrees of freedom (n - 1)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise DegenerateSampleError("one-sample t needs n >= 2")
    sd = x.std(ddof=1)
    if sd == 0.0:
        raise DegenerateSampleError("sample has zero variance")
    return float(x.mean() / (sd / math.sqrt(n))), n - 1


def two_sample_t(case, control, welch=False):
    """Two-sample t statistic (case mean minus control mean) and null df.

    The default uses the pooled standard deviation with denominator n - 2 and
    df = n1 + n2 - 2.  With ``welch=True`` the unpooled statistic with
    Satterthwaite degrees of freedom is returned instead.
    """
    x = np.asarray(case, dtype=float)
    y = np.asarray(control, dtype=float)
    n1, n2 = x.size, y.size
    if n1 < 2 or n2 < 2:
        raise DegenerateSampleError("two-sample t needs >= 2 observations per arm")
    v1 = x.var(ddof=1)
    v2 = y.var(ddof=1)
    diff = x.mean() - y.mean()
    if welch:
        se2 = v1 / n1 + v2 / n2
        if se2 == 0.0:
            raise DegenerateSampleError("both arms have zero variance")
        df = se2 * se2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
        return float(diff / math.sqrt(se2)), float(df)
    pooled = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
    if pooled == 0.0:
        raise DegenerateSampleError("pooled variance is zero")
    se = math.sqrt(pooled * (1.0 / n1 + 1.0 / n2))
    return float(diff / se), n1 + n2 - 2


class StudentTCdf:
    """Null CDF of a t statistic with fixed degrees of freedom."""

    def __init__(self, df):
        self.df = float(df)
        if self.df <= 0:
            raise ValueError(f"df must be positive, got {df}")

    def cdf(self, x):
        return special.stdtr(self.df, np.asarray(x, dtype=float))

    def __repr__(self):
        return f"StudentTCdf(df={self.df})"
