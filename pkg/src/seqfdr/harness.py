"""Monte Carlo experiment runner and summary aggregation.

Replicates are seeded independently through ``SeedSequence([seed, rep])``,
so any single replicate can be reproduced in isolation, and aggregation
uses a fixed summation order for bitwise-reproducible summaries.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .competitors import GapRule, bh_decisions
from .examples import ExampleSpec
from .exceptions import CalibrationError, ConfigError, SearchFailureError
from .metrics import error_counts, fdp, fnp
from .pipelines import LlrPipeline, OneSampleTPipeline, TwoSampleTPipeline
from .sequential import SequentialLfdrTest

PROCEDURES = ("oracle", "data_driven", "gap_ao", "gap_sb")

# seed stream tags so shared infrastructure (null tables) never collides
# with per-replicate data streams
_NULL_TABLE_TAG = 0x7AB1E


@dataclass
class McSummary:
    """Averaged operating characteristics over Monte Carlo replicates."""

    procedure: str
    example_id: str
    m: int
    pi1: float
    alpha: float
    beta: float
    runs: int
    seed: int
    asn: float
    asn_se: float
    fdr_pct: float
    fdr_se_pct: float
    fnr_pct: float
    fnr_se_pct: float
    truncated_runs: int = 0
    savings_pct: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "procedure": self.procedure,
            "example": self.example_id,
            "m": self.m,
            "pi1": self.pi1,
            "alpha": self.alpha,
            "beta": self.beta,
            "runs": self.runs,
            "seed": self.seed,
            "asn": self.asn,
            "asn_se": self.asn_se,
            "fdr_hat_pct": self.fdr_pct,
            "fdr_se_pct": self.fdr_se_pct,
            "fnr_hat_pct": self.fnr_pct,
            "fnr_se_pct": self.fnr_se_pct,
            "truncated_runs": self.truncated_runs,
        }
        if self.savings_pct is not None:
            out["savings_pct"] = self.savings_pct
        out.update(self.extra)
        return out


def savings_pct(asn_reference, asn_other):
    """Percent sample-size saving of the reference rule against another."""
    return 100.0 * (1.0 - asn_reference / asn_other)


def _rep_rng(seed, rep):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(rep)]))


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    se = arr.std(ddof=1) / math.sqrt(arr.size) if arr.size > 1 else 0.0
    return float(arr.mean()), float(se)


def _build_pipeline(spec: ExampleSpec, seed):
    if spec.statistic == "llr":
        return LlrPipeline(
            spec.model,
            null_table_draws=spec.null_table_draws,
            null_table_seed=np.random.SeedSequence([int(seed), _NULL_TABLE_TAG]),
        )
    if spec.statistic == "t_one_sample":
        return OneSampleTPipeline()
    if spec.statistic == "t_two_sample":
        return TwoSampleTPipeline()
    raise ConfigError(f"unknown statistic {spec.statistic!r}")


def _summarize(procedure, spec, alpha, beta, runs, seed, rows, extra=None):
    times, fdps, fnps, truncated = rows
    asn, asn_se = _mean_se(times)
    fdr, fdr_se = _mean_se(np.asarray(fdps) * 100.0)
    fnr, fnr_se = _mean_se(np.asarray(fnps) * 100.0)
    return McSummary(
        procedure=procedure,
        example_id=spec.example_id,
        m=spec.m,
        pi1=spec.pi1,
        alpha=alpha,
        beta=beta,
        runs=runs,
        seed=seed,
        asn=asn,
        asn_se=asn_se,
        fdr_pct=fdr,
        fdr_se_pct=fdr_se,
        fnr_pct=fnr,
        fnr_se_pct=fnr_se,
        truncated_runs=int(truncated),
        extra=extra or {},
    )


def run_experiment(
    spec: ExampleSpec,
    procedure,
    alpha=0.05,
    beta=0.10,
    runs=200,
    seed=0,
    pilot=None,
    max_stages=100_000,
    gap_cutoff=None,
    pi0_kernel="triangular",
) -> McSummary:
    """Monte Carlo evaluation of one procedure on one benchmark problem.

    Each replicate draws a fresh truth vector, streams freshly generated
    stages into the procedure until it stops, and records the stopping
    time together with the realized false discovery and nondiscovery
    proportions.  Gap-rule replicates receive the realized signal count.
    """
    if procedure not in PROCEDURES:
        raise ConfigError(f"unknown procedure {procedure!r}; expected one of {PROCEDURES}")
    if procedure == "gap_sb" and gap_cutoff is None:
        raise ConfigError("gap_sb needs a calibrated cutoff; run calibrate_gap_sb first")
    if runs < 1:
        raise ConfigError("runs must be >= 1")

    times, fdps, fnps = [], [], []
    truncated = 0

    if procedure in ("oracle", "data_driven"):
        if procedure == "oracle":
            # the oracle posterior always works off the likelihood-ratio
            # stream, regardless of the statistic the data-driven rule uses
            pipeline = LlrPipeline(spec.model)
        else:
            pipeline = _build_pipeline(spec, seed)
        test = SequentialLfdrTest(
            alpha=alpha,
            beta=beta,
            rule=procedure,
            model=spec.model,
            statistic=pipeline,
            pilot=pilot,
            max_stages=max_stages,
            pi0_kernel=pi0_kernel,
        )
        view = "case" if (spec.paired and procedure == "oracle") else "full"
        for rep in range(runs):
            rng = _rep_rng(seed, rep)
            truth = spec.truth(rng)
            try:
                test.fit(spec.source(truth, rng, view=view))
            except Exception as err:
                raise type(err)(f"replicate {rep}: {err}") from err
            counts = error_counts(truth, test.decisions_)
            times.append(test.stopping_time_)
            fdps.append(fdp(counts))
            fnps.append(fnp(counts))
            truncated += test.stop_reason_ == "truncated"
        extra = {}
    else:
        cutoff = gap_cutoff  # None means the theoretical cutoff per replicate
        for rep in range(runs):
            rng = _rep_rng(seed, rep)
            truth = spec.truth(rng)
            k = int(truth.sum())
            rule = GapRule(
                k=k, model=spec.model, alpha=alpha, beta=beta,
                cutoff=cutoff, max_stages=max_stages,
            )
            try:
                rule.fit(spec.source(truth, rng, view="case" if spec.paired else "full"))
            except Exception as err:
                raise type(err)(f"replicate {rep}: {err}") from err
            counts = error_counts(truth, rule.decisions_)
            times.append(rule.stopping_time_)
            fdps.append(fdp(counts))
            fnps.append(fnp(counts))
            truncated += rule.stop_reason_ == "truncated"
        extra = {} if gap_cutoff is None else {"gap_cutoff": gap_cutoff}

    return _summarize(procedure, spec, alpha, beta, runs, seed, (times, fdps, fnps, truncated), extra)


def calibrate_gap_sb(
    spec: ExampleSpec,
    alpha=0.05,
    beta=0.10,
    runs=50,
    seed=0,
    grid_start=0.1,
    grid_step=0.1,
    grid_cap=50.0,
    max_stages=100_000,
):
    """Grid-search the smallest gap cutoff meeting both error targets.

    Walks cutoffs grid_start, grid_start + grid_step, ... and returns the
    first one whose Monte Carlo error rates satisfy fdr <= alpha and
    fnr <= beta over ``runs`` replicates (common random numbers across
    candidates).  Exhausting the grid raises CalibrationError.
    """
    cutoff = grid_start
    while cutoff <= grid_cap + 1e-9:
        summary = run_experiment(
            spec, "gap_sb", alpha=alpha, beta=beta, runs=runs, seed=seed,
            gap_cutoff=cutoff, max_stages=max_stages,
        )
        if summary.fdr_pct <= 100.0 * alpha and summary.fnr_pct <= 100.0 * beta:
            return float(cutoff)
        cutoff = round(cutoff + grid_step, 10)
    raise CalibrationError(
        f"no cutoff below {grid_cap} met fdr<={alpha} and fnr<={beta} at {runs} runs"
    )


def _bh_fnr_at_n(spec: ExampleSpec, n, alpha, runs, seed):
    """BH error rates at a fixed per-stream sample size n."""
    fdps, fnps = [], []
    pipeline = _build_pipeline(spec, seed)
    two_sided = spec.bh_two_sided
    for rep in range(runs):
        rng = _rep_rng(seed, rep)
        truth = spec.truth(rng)
        source = spec.source(truth, rng)
        pipeline.reset(spec.m)
        for _ in range(n):
            pipeline.consume(next(source))
        pvals = pipeline.pvalues(two_sided=two_sided)
        counts = error_counts(truth, bh_decisions(pvals, alpha))
        fdps.append(fdp(counts))
        fnps.append(fnp(counts))
    fdr, fdr_se = _mean_se(np.asarray(fdps) * 100.0)
    fnr, fnr_se = _mean_se(np.asarray(fnps) * 100.0)
    return fdr, fdr_se, fnr, fnr_se


def bh_matched_sample_size(
    spec: ExampleSpec,
    target_fnr_pct,
    alpha=0.05,
    runs=200,
    seed=0,
    n_start=4,
    n_cap=1_000_000,
    tolerance_pct=0.5,
):
    """Smallest fixed sample size at which BH matches a target FNR.

    BH's false nondiscovery rate falls as the per-stream sample size grows;
    this doubles n until the Monte Carlo FNR crosses below the target, then
    bisects to the smallest crossing n.  The achieved FNR must land within
    ``tolerance_pct`` points of the target, otherwise the search fails.

    Returns (n_hat, McSummary).
    """
    target = float(target_fnr_pct)
    if target <= 0:
        raise ConfigError("target FNR percentage must be positive")

    def fnr_at(n):
        return _bh_fnr_at_n(spec, n, alpha, runs, seed)

    min_n = _build_pipeline(spec, seed).min_stages
    n_lo, n_hi = None, None
    n = max(int(n_start), min_n)
    cache = {}
    while n <= n_cap:
        cache[n] = fnr_at(n)
        if cache[n][2] <= target:
            n_hi = n
            break
        n_lo = n
        n *= 2
    if n_hi is None:
        raise SearchFailureError(
            f"BH FNR stayed above {target}% up to n={n_cap}"
        )
    if n_lo is None:
        # the sample-size floor of the statistic bounds the search below
        n_lo = min_n - 1
    while n_hi - n_lo > 1:
        mid = (n_lo + n_hi) // 2
        cache[mid] = fnr_at(mid)
        if cache[mid][2] <= target:
            n_hi = mid
        else:
            n_lo = mid
    n_hat = n_hi
    fdr, fdr_se, fnr, fnr_se = cache[n_hat]
    at_floor = n_hat == min_n and fnr <= target
    if abs(fnr - target) > tolerance_pct and not at_floor:
        # a vacuous target is satisfied at the statistic's minimal sample
        # size and returns that boundary; anything else this far from the
        # target means the FNR jumped across it between n and n + 1
        raise SearchFailureError(
            f"closest BH FNR at n={n_hat} is {fnr:.2f}%, more than "
            f"{tolerance_pct} points from the {target:.2f}% target"
        )
    summary = McSummary(
        procedure="bh_matched",
        example_id=spec.example_id,
        m=spec.m,
        pi1=spec.pi1,
        alpha=alpha,
        beta=float("nan"),
        runs=runs,
        seed=seed,
        asn=float(n_hat),
        asn_se=0.0,
        fdr_pct=fdr,
        fdr_se_pct=fdr_se,
        fnr_pct=fnr,
        fnr_se_pct=fnr_se,
        extra={"n_hat": n_hat, "target_fnr_pct": target},
    )
    return n_hat, summary


def sweep_m(
    make_spec,
    m_list,
    procedures=("oracle", "data_driven", "gap_ao"),
    alpha=0.05,
    beta=0.10,
    runs=50,
    seed=0,
    max_stages=100_000,
):
    """ASN-versus-m comparison across procedures; returns McSummary rows.

    ``make_spec`` maps an m to an ExampleSpec (usually a make_example
    partial); gap_sb entries calibrate their cutoff first.
    """
    rows = []
    for m in m_list:
        spec = make_spec(m)
        for procedure in procedures:
            cutoff = None
            if procedure == "gap_sb":
                cutoff = calibrate_gap_sb(
                    spec, alpha=alpha, beta=beta, runs=50, seed=seed, max_stages=max_stages
                )
            rows.append(
                run_experiment(
                    spec, procedure, alpha=alpha, beta=beta, runs=runs, seed=seed,
                    gap_cutoff=cutoff, max_stages=max_stages,
                )
            )
    return rows
