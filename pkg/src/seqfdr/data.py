"""Case-control dataset ingestion, preprocessing, and sequential replay.

The expected CSV layout is genes down the rows and samples across the
columns: the header row labels each sample column as case or control, the
first column holds gene identifiers.  Replay feeds the columns to the
data-driven sequential test one sample at a time, choosing the arm of each
new sample uniformly at random, which mirrors how such a study would
accrue subjects.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator, TransformerMixin

from .competitors import AdaptZ, BenjaminiHochberg
from .exceptions import ConfigError, DataError
from .models import StudentTCdf
from .pipelines import TwoSampleTPipeline
from .sequential import SequentialLfdrTest

ARM_LABELS = ("case", "control")


@dataclass
class CaseControlMatrix:
    """Expression-style matrix: genes x samples with per-sample arm labels."""

    values: np.ndarray
    labels: list
    gene_ids: list

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DataError(f"matrix must be 2-d, got shape {self.values.shape}")
        n_genes, n_samples = self.values.shape
        if len(self.labels) != n_samples:
            raise DataError(
                f"{n_samples} sample columns but {len(self.labels)} labels"
            )
        if len(self.gene_ids) != n_genes:
            raise DataError(f"{n_genes} gene rows but {len(self.gene_ids)} gene ids")
        bad = sorted(set(self.labels) - set(ARM_LABELS))
        if bad:
            raise DataError(f"unknown arm labels {bad}; expected {ARM_LABELS}")
        for arm in ARM_LABELS:
            if self.labels.count(arm) < 2:
                raise DataError(f"need >= 2 {arm} samples, got {self.labels.count(arm)}")

    @property
    def n_genes(self):
        return self.values.shape[0]

    @property
    def n_samples(self):
        return self.values.shape[1]

    def arm(self, label):
        """Columns belonging to one arm, as a (genes, n_label) view."""
        idx = [j for j, lab in enumerate(self.labels) if lab == label]
        return self.values[:, idx]


def _resolve_label(raw, case_label, control_label):
    lab = raw.strip().lower()
    if lab == case_label.lower():
        return "case"
    if lab == control_label.lower():
        return "control"
    return None


def read_case_control_csv(path, case_label="case", control_label="control"):
    """Parse a genes-by-samples CSV with arm labels in the header row.

    Raises DataError naming the offending row or column on ragged rows,
    non-numeric cells, or unresolvable labels.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as err:
        raise DataError(f"{path}: {err.strerror or err}") from err
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(header) < 3:
            raise DataError(f"{path}: need a gene-id column plus >= 2 samples")
        labels = []
        for j, raw in enumerate(header[1:], start=2):
            lab = _resolve_label(raw, case_label, control_label)
            if lab is None:
                raise DataError(
                    f"{path}: header column {j} has label {raw!r}, "
                    f"expected {case_label!r} or {control_label!r}"
                )
            labels.append(lab)
        gene_ids = []
        rows = []
        n_cols = len(header)
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_cols:
                raise DataError(
                    f"{path}: row {i} has {len(row)} fields, expected {n_cols}"
                )
            gene_ids.append(row[0])
            try:
                values = [float(cell) for cell in row[1:]]
            except ValueError:
                bad = next(j for j, cell in enumerate(row[1:], start=2)
                           if not _is_float(cell))
                raise DataError(
                    f"{path}: row {i}, column {bad}: non-numeric cell {row[bad - 1]!r}"
                ) from None
            rows.append(values)
        if not rows:
            raise DataError(f"{path}: no data rows")
    values = np.asarray(rows, dtype=float)
    keep = np.all(np.isfinite(values), axis=1)
    if not keep.all():
        dropped = int((~keep).sum())
        values = values[keep]
        gene_ids = [g for g, k in zip(gene_ids, keep) if k]
        import warnings

        warnings.warn(f"{path}: dropped {dropped} rows with missing values")
    return CaseControlMatrix(values=values, labels=labels, gene_ids=gene_ids)


def _is_float(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def write_case_control_csv(matrix: CaseControlMatrix, path):
    """Emit a matrix in the same layout read_case_control_csv expects."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gene_id"] + list(matrix.labels))
        for gid, row in zip(matrix.gene_ids, matrix.values):
            writer.writerow([gid] + [repr(float(v)) for v in row])


def standardize_samples(values):
    """Center and scale each sample column to mean 0, sd 1."""
    values = np.asarray(values, dtype=float)
    means = values.mean(axis=0)
    sds = values.std(axis=0, ddof=1)
    zero = np.nonzero(sds == 0)[0]
    if zero.size:
        raise DataError(f"sample column {zero[0]} has zero variance")
    return (values - means) / sds


def quantile_normalize(values):
    """Force every sample column onto the common rank-wise mean profile."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, axis=0, kind="stable")
    ranked = np.take_along_axis(values, order, axis=0)
    profile = ranked.mean(axis=1)
    out = np.empty_like(values)
    np.put_along_axis(out, order, profile[:, None], axis=0)
    return out


def preprocess(matrix: CaseControlMatrix) -> CaseControlMatrix:
    """Per-sample standardization followed by quantile normalization."""
    values = quantile_normalize(standardize_samples(matrix.values))
    return replace(matrix, values=values)


class CaseControlPreprocessor(BaseEstimator, TransformerMixin):
    """Transformer wrapper over the standardize + quantile-normalize step."""

    def __init__(self, standardize=True, quantile=True):
        self.standardize = standardize
        self.quantile = quantile

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        values = np.asarray(X, dtype=float)
        if self.standardize:
            values = standardize_samples(values)
        if self.quantile:
            values = quantile_normalize(values)
        return values


@dataclass
class ReplayConfig:
    """How to replay a case-control matrix as a sequential experiment.

    ``constrain_density`` defaults to False here: at gene-screen dimensions
    the raw kernel estimate of the z-score density is already stable, and
    the unconstrained lfdr values keep borderline genes visible to the
    acceptance boundary.
    """

    alpha: float = 0.05
    beta: float = 0.10
    pilot_per_arm: int = 25
    seed: int = 0
    welch: bool = False
    constrain_density: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if self.pilot_per_arm < 2:
            raise ConfigError("pilot_per_arm must be >= 2")


@dataclass
class ReplayReport:
    """Outcome of one sequential replay over a dataset."""

    stopping_time: int
    n_case: int
    n_control: int
    decisions: np.ndarray
    n_discoveries: int
    stopped: bool
    exhausted: bool
    pi0_hat: float
    discovered_genes: list
    trace: list


def replay(matrix: CaseControlMatrix, cfg: ReplayConfig) -> ReplayReport:
    """Replay the dataset through the data-driven sequential test.

    The pilot takes ``pilot_per_arm`` samples from each arm (a seeded draw
    without replacement); every later stage reveals one still-unseen sample
    from a uniformly chosen arm, falling back to the other arm when one is
    exhausted.  Gene-level two-sample t statistics are mapped to z-scores
    through the exact t null at the current arm sizes.  If the boundary
    never fires the run ends with the exhaustion flag set and the
    final-stage budget-limited rejections reported.
    """
    rng = np.random.default_rng(cfg.seed)
    case = matrix.arm("case")
    control = matrix.arm("control")
    if cfg.pilot_per_arm > case.shape[1] or cfg.pilot_per_arm > control.shape[1]:
        raise ConfigError(
            f"pilot of {cfg.pilot_per_arm} per arm exceeds arm sizes "
            f"({case.shape[1]} case, {control.shape[1]} control)"
        )
    case_order = rng.permutation(case.shape[1])
    control_order = rng.permutation(control.shape[1])

    def payloads():
        i = j = 0
        for _ in range(cfg.pilot_per_arm):
            yield case[:, case_order[i]], None
            i += 1
            yield None, control[:, control_order[j]]
            j += 1
        while i < case.shape[1] or j < control.shape[1]:
            pick_case = rng.random() < 0.5
            if pick_case and i >= case.shape[1]:
                pick_case = False
            elif not pick_case and j >= control.shape[1]:
                pick_case = True
            if pick_case:
                yield case[:, case_order[i]], None
                i += 1
            else:
                yield None, control[:, control_order[j]]
                j += 1

    test = SequentialLfdrTest(
        alpha=cfg.alpha,
        beta=cfg.beta,
        rule="data_driven",
        statistic=TwoSampleTPipeline(welch=cfg.welch),
        pilot=2 * cfg.pilot_per_arm,
        max_stages=matrix.n_samples + 1,
        constrain_density=cfg.constrain_density,
        record_trace=cfg.record_trace,
    )
    test.fit(payloads())
    decisions = test.decisions_
    discovered = [g for g, d in zip(matrix.gene_ids, decisions) if d]
    return ReplayReport(
        stopping_time=test.stopping_time_,
        n_case=test.pipeline_.n_case,
        n_control=test.pipeline_.n_control,
        decisions=decisions,
        n_discoveries=int(decisions.sum()),
        stopped=test.stopped_,
        exhausted=test.stop_reason_ in ("exhausted", "truncated"),
        pi0_hat=test.pi0_hat_ if test.pi0_hat_ is not None else float("nan"),
        discovered_genes=discovered,
        trace=test.trace_ or [],
    )


def synthetic_case_control(
    n_genes=6033,
    n_case=52,
    n_control=50,
    n_signal=16,
    effect_mean=1.0,
    effect_sd=0.15,
    n_moderate=200,
    moderate_mean=0.35,
    moderate_sd=0.1,
    weak_sd=0.08,
    seed=0,
):
    """Generate a case-control matrix with a layered planted signal.

    Expression values are unit-variance gaussian noise.  Three effect
    layers mimic real expression data: a handful of strong signal genes, a
    subpopulation of moderate effects that fattens the z-score tails, and
    a weak N(0, weak_sd) case shift on every remaining gene that
    overdisperses the bulk.  All shifts carry random signs.
    """
    rng = np.random.default_rng(seed)
    n_samples = n_case + n_control
    values = rng.standard_normal((n_genes, n_samples))
    shifts = rng.normal(0.0, weak_sd, n_genes) if weak_sd > 0 else np.zeros(n_genes)
    picks = rng.choice(n_genes, size=n_signal + n_moderate, replace=False)
    signal, moderate = picks[:n_signal], picks[n_signal:]
    strong = rng.normal(effect_mean, effect_sd, n_signal)
    shifts[signal] = strong * rng.choice((-1.0, 1.0), size=n_signal)
    mod = rng.normal(moderate_mean, moderate_sd, n_moderate)
    shifts[moderate] = mod * rng.choice((-1.0, 1.0), size=n_moderate)
    values[:, :n_case] += shifts[:, None]
    labels = ["case"] * n_case + ["control"] * n_control
    gene_ids = [f"g{i:05d}" for i in range(n_genes)]
    return CaseControlMatrix(values=values, labels=labels, gene_ids=gene_ids)


@dataclass
class FixedSampleReport:
    """Full-data BH and AdaptZ analyses of a case-control matrix."""

    bh_decisions: np.ndarray
    bh_count: int
    adaptz_decisions: np.ndarray
    adaptz_count: int
    pvalues: np.ndarray
    zscores: np.ndarray
    pi0_hat: float


def fixed_sample_analysis(matrix: CaseControlMatrix, alpha=0.05, welch=False):
    """Fixed-sample gene screen: two-sided BH and lfdr step-up on full data."""
    pipeline = TwoSampleTPipeline(welch=welch)
    pipeline.reset(matrix.n_genes)
    for j in range(matrix.n_samples):
        col = matrix.values[:, j]
        if matrix.labels[j] == "case":
            pipeline.consume((col, None))
        else:
            pipeline.consume((None, col))
    stats, df = pipeline.statistics()
    null_cdf = StudentTCdf(df).cdf(stats)
    pvalues = 2.0 * np.minimum(null_cdf, 1.0 - null_cdf)
    zscores = special.ndtri(np.clip(null_cdf, 1e-15, 1 - 1e-15))
    bh = BenjaminiHochberg(alpha=alpha).fit(pvalues)
    adaptz = AdaptZ(alpha=alpha).fit(zscores)
    return FixedSampleReport(
        bh_decisions=bh.decisions_,
        bh_count=bh.n_rejected_,
        adaptz_decisions=adaptz.decisions_,
        adaptz_count=adaptz.n_rejected_,
        pvalues=pvalues,
        zscores=zscores,
        pi0_hat=adaptz.pi0_hat_,
    )
