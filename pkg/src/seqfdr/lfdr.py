"""Local false discovery rate statistics.

Two paths produce the per-stream lfdr vector the boundary engine consumes:

* the oracle path, where the two-group model is known exactly and the lfdr
  follows from the accumulated log-likelihood ratio, and
* the data-driven path, where z-scores with a standard normal null feed a
  null-proportion estimate and a kernel density estimate of the mixture.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.signal import fftconvolve

from ._validation import as_float_vector, check_level, check_positive
from .exceptions import DegenerateSampleError, InsufficientDataError

# floor applied to estimated densities so extreme z-scores cannot produce 0/0
DENSITY_FLOOR = 1e-12

# estimated null proportions are clamped to this range; the lower clamp keeps
# dense regimes (pi1 = 0.8) from blowing up the lfdr ratio
PI0_MIN = 0.01

_STD_NORMAL_LOG = -0.5 * math.log(2.0 * math.pi)

# Gauss-Legendre nodes on [0, 1] for the smoothing-kernel integral of the
# characteristic-function pi0 estimator
_QUAD_NODES, _QUAD_WEIGHTS = np.polynomial.legendre.leggauss(64)
_QUAD_NODES = 0.5 * (_QUAD_NODES + 1.0)
_QUAD_WEIGHTS = 0.5 * _QUAD_WEIGHTS


def oracle_lfdr(cum_llr, pi0):
    """Posterior null probabilities from accumulated log-likelihood ratios.

    Computes pi0 / (pi0 + (1 - pi0) * exp(llr)) per stream in a numerically
    stable form; saturated ratios map to exactly 0 or 1.
    """
    llr = np.asarray(cum_llr, dtype=float)
    pi0 = check_level(pi0, "pi0")
    # t = pi0 / (pi0 + pi1 e^llr) = sigmoid(log(pi0/pi1) - llr)
    logit = math.log(pi0) - math.log1p(-pi0) - llr
    return special.expit(logit)


@dataclass(frozen=True)
class Pi0Estimate:
    """A clamped null-proportion estimate plus how it was obtained."""

    value: float
    method: str
    tuning: float

    def __float__(self):
        return self.value


def estimate_pi0_jincai(zscores, lam=0.1, kernel="triangular"):
    """Null-proportion estimate from the empirical characteristic function.

    Evaluates the characteristic-function estimator at frequency
    t_m = sqrt(2 * lam * log m), where the standard normal null contributes
    exactly 1 per observation in expectation.  ``kernel`` selects the
    smoothing weight over frequencies [0, t_m]: "triangular" (default) or
    "uniform" average out the oscillatory alternative contribution, while
    "none" evaluates the bare cosine estimator at t_m.  The result is clamped
    to [0.01, 1].
    """
    z = as_float_vector(zscores, "zscores")
    m = z.size
    if m < 2:
        raise InsufficientDataError("pi0 estimation needs m >= 2 z-scores")
    lam = check_positive(lam, "lam")
    t_m = math.sqrt(2.0 * lam * math.log(m))
    if kernel == "none":
        raw = float(np.mean(np.cos(t_m * z)) * math.exp(0.5 * t_m * t_m))
    elif kernel in ("triangular", "uniform"):
        xi = _QUAD_NODES
        if kernel == "triangular":
            weight = 2.0 * (1.0 - xi) * _QUAD_WEIGHTS
        else:
            weight = np.full_like(xi, 1.0) * _QUAD_WEIGHTS
        # Omega(z) = int_0^1 w(xi) cos(t xi z) exp(t^2 xi^2 / 2) dxi, doubled
        # onto [-1, 1] by evenness of the integrand
        boost = np.exp(0.5 * (t_m * xi) ** 2) * weight
        raw = float((np.cos(np.outer(z, t_m * xi)) @ boost).mean())
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return Pi0Estimate(value=float(np.clip(raw, PI0_MIN, 1.0)), method="jin_cai", tuning=lam)


def estimate_pi0_storey(pvalues, lam=0.5):
    """Storey-style null-proportion estimate from a p-value tail count."""
    p = as_float_vector(pvalues, "pvalues")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    lam = check_level(lam, "lam")
    raw = np.sum(p > lam) / (p.size * (1.0 - lam))
    return Pi0Estimate(value=float(np.clip(raw, PI0_MIN, 1.0)), method="storey", tuning=lam)


def estimate_pi0_oracle(pi0):
    return Pi0Estimate(value=check_level(pi0, "pi0"), method="oracle", tuning=float("nan"))


class GaussianKde:
    """Gaussian-kernel density estimate with the Silverman bandwidth.

    The bandwidth is 0.9 * min(sd, IQR / 1.34) * m**(-1/5) (falling back to
    whichever spread measure is positive).  Evaluation is exact for samples
    up to ``exact_threshold`` points and switches to a binned grid with
    Gaussian smoothing plus linear interpolation beyond that; both paths
    floor the density at 1e-12.
    """

    def __init__(self, sample, exact_threshold=64, grid_size=4096):
        z = as_float_vector(sample, "sample")
        if z.size < 2:
            raise InsufficientDataError("kde needs at least 2 observations")
        sd = z.std(ddof=1)
        q75, q25 = np.percentile(z, [75, 25])
        iqr = q75 - q25
        spreads = [s for s in (sd, iqr / 1.34) if s > 0]
        if not spreads:
            raise DegenerateSampleError("sample has zero spread")
        self.bandwidth = 0.9 * min(spreads) * z.size ** (-0.2)
        self._sample = z
        self._grid = None
        self._grid_density = None
        if z.size > exact_threshold:
            self._build_grid(grid_size)

    def _build_grid(self, grid_size):
        h = self.bandwidth
        lo = self._sample.min() - 5.0 * h
        hi = self._sample.max() + 5.0 * h
        edges = np.linspace(lo, hi, grid_size + 1)
        step = edges[1] - edges[0]
        counts, _ = np.histogram(self._sample, bins=edges)
        density = counts / (self._sample.size * step)
        # smooth by FFT convolution with the gaussian kernel (6 sigma support)
        half = int(np.ceil(6.0 * h / step))
        taps = np.arange(-half, half + 1) * step
        kernel = np.exp(-0.5 * (taps / h) ** 2)
        kernel /= kernel.sum()
        density = fftconvolve(density, kernel, mode="same")
        self._grid = 0.5 * (edges[:-1] + edges[1:])
        self._grid_density = np.maximum(density, 0.0)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        if self._grid is not None:
            vals = np.interp(pts, self._grid, self._grid_density, left=0.0, right=0.0)
        else:
            h = self.bandwidth
            u = (pts[..., None] - self._sample) / h
            vals = np.exp(-0.5 * u * u).sum(axis=-1) / (self._sample.size * h * math.sqrt(2.0 * math.pi))
        return np.maximum(vals, DENSITY_FLOOR)


def kde(zscores):
    """Fit a GaussianKde to z-scores (module-level convenience wrapper)."""
    return GaussianKde(zscores)


class TwoGroupDensity:
    """Mixture density constrained to the two-group form pi0*phi + pi1*g.

    A raw kernel estimate of the z-score density fluctuates around the
    standard normal in the null bulk, which makes the implied lfdr values
    dip below 1 on pure noise.  This wrapper keeps only the positive excess
    of the kernel estimate above pi0*phi and rescales it to total mass
    1 - pi0, so the constrained density is exactly pi0*phi wherever the
    kernel estimate carries no evidence of an alternative component.
    """

    def __init__(self, density, pi0, grid_size=2001, span=4.0):
        self.pi0 = float(pi0)
        self.density = density
        if isinstance(density, GaussianKde):
            sample = density._sample
            lo, hi = sample.min() - span, sample.max() + span
        else:
            lo, hi = -10.0, 10.0
        grid = np.linspace(lo, hi, grid_size)
        null_g = np.exp(_STD_NORMAL_LOG - 0.5 * grid * grid)
        excess = np.maximum(np.asarray(density(grid), dtype=float) - self.pi0 * null_g, 0.0)
        total = np.trapezoid(excess, grid)
        self._scale = (1.0 - self.pi0) / total if total > 1e-12 else 0.0

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        null_d = np.exp(_STD_NORMAL_LOG - 0.5 * pts * pts)
        excess = np.maximum(np.asarray(self.density(pts), dtype=float) - self.pi0 * null_d, 0.0)
        return np.maximum(self.pi0 * null_d + self._scale * excess, DENSITY_FLOOR)


def estimated_lfdr(zscores, pi0, density):
    """Estimated local fdr per z-score: clamp(pi0 * phi(z) / fhat(z), 0, 1).

    ``pi0`` may be a Pi0Estimate or a plain float; ``density`` is any
    callable evaluating the mixture density (normally a GaussianKde).
    """
    z = as_float_vector(zscores, "zscores")
    pi0_val = float(pi0)
    null_density = np.exp(_STD_NORMAL_LOG - 0.5 * z * z)
    fhat = np.maximum(np.asarray(density(z), dtype=float), DENSITY_FLOOR)
    return np.clip(pi0_val * null_density / fhat, 0.0, 1.0)
