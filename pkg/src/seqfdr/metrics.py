"""Decision vectors and error-proportion arithmetic.

Conventions: a truth vector holds one indicator per hypothesis (1 means the
alternative is true), a decision vector holds one indicator per hypothesis
(1 means the null is rejected).  The false discovery / nondiscovery
proportions guard their denominators with ``max(., 1)`` so the all-accept
and all-reject edge cases are well defined.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_binary_vector
from .exceptions import DimensionError


@dataclass(frozen=True)
class ErrorCounts:
    """Counts of false rejections (v), rejections (r), false acceptances (w)
    among m hypotheses."""

    v: int
    r: int
    w: int
    m: int

    def __post_init__(self):
        if not 0 <= self.v <= self.r <= self.m:
            raise ValueError(f"need 0 <= v <= r <= m, got {self}")
        if not 0 <= self.w <= self.m - self.r:
            raise ValueError(f"need 0 <= w <= m - r, got {self}")


def error_counts(truth, decisions) -> ErrorCounts:
    """Tally rejection/acceptance errors of ``decisions`` against ``truth``.

    Parameters
    ----------
    truth : sequence of {0, 1}
        Ground-truth indicators, 1 where the alternative holds.
    decisions : sequence of {0, 1}
        Test decisions, 1 where the null was rejected.

    Returns
    -------
    ErrorCounts
        v (false rejections), r (rejections), w (false acceptances), m.
    """
    theta = as_binary_vector(truth, "truth")
    delta = as_binary_vector(decisions, "decisions")
    if theta.shape != delta.shape:
        raise DimensionError(
            f"truth has length {theta.size} but decisions has length {delta.size}"
        )
    v = int(np.sum((1 - theta) * delta))
    r = int(np.sum(delta))
    w = int(np.sum(theta * (1 - delta)))
    return ErrorCounts(v=v, r=r, w=w, m=theta.size)


def fdp(counts: ErrorCounts) -> float:
    """False discovery proportion v / max(r, 1)."""
    return counts.v / max(counts.r, 1)


def fnp(counts: ErrorCounts) -> float:
    """False nondiscovery proportion w / max(m - r, 1)."""
    return counts.w / max(counts.m - counts.r, 1)
