"""Sequential multiple testing with adaptive local-fdr stopping boundaries."""

from .boundary import (
    BoundarySnapshot,
    accept_count,
    cutoffs,
    decide,
    qhat,
    qhat_prime,
    reject_count,
    select_s,
    stop_check,
)
from .competitors import AdaptZ, BenjaminiHochberg, GapRule, adaptz_decisions, bh_decisions, gap_ao_cutoff
from .data import (
    CaseControlMatrix,
    CaseControlPreprocessor,
    FixedSampleReport,
    ReplayConfig,
    ReplayReport,
    fixed_sample_analysis,
    preprocess,
    quantile_normalize,
    read_case_control_csv,
    replay,
    standardize_samples,
    synthetic_case_control,
    write_case_control_csv,
)
from .examples import ExampleSpec, generate_stage, generate_truth, make_example
from .harness import McSummary, bh_matched_sample_size, calibrate_gap_sb, run_experiment, savings_pct, sweep_m
from .lfdr import (
    GaussianKde,
    Pi0Estimate,
    TwoGroupDensity,
    estimate_pi0_jincai,
    estimate_pi0_storey,
    estimated_lfdr,
    kde,
    oracle_lfdr,
)
from .metrics import ErrorCounts, error_counts, fdp, fnp
from .models import (
    Binomial,
    Cauchy,
    EmpiricalNullTable,
    Exponential,
    FiniteMixture,
    Gaussian,
    StreamState,
    StudentTCdf,
    TwoGroupModel,
    empirical_null_cdf,
    one_sample_t,
    two_sample_t,
    update_llr,
    zscore,
)
from .pipelines import LlrPipeline, OneSampleTPipeline, TwoSampleTPipeline
from .sequential import SequentialLfdrTest, SequentialResult

__version__ = "0.1.0"

__all__ = [
    "AdaptZ",
    "BenjaminiHochberg",
    "Binomial",
    "BoundarySnapshot",
    "CaseControlMatrix",
    "CaseControlPreprocessor",
    "Cauchy",
    "EmpiricalNullTable",
    "ErrorCounts",
    "ExampleSpec",
    "Exponential",
    "FiniteMixture",
    "FixedSampleReport",
    "GapRule",
    "Gaussian",
    "GaussianKde",
    "LlrPipeline",
    "McSummary",
    "OneSampleTPipeline",
    "Pi0Estimate",
    "ReplayConfig",
    "ReplayReport",
    "SequentialLfdrTest",
    "SequentialResult",
    "StreamState",
    "StudentTCdf",
    "TwoGroupDensity",
    "TwoGroupModel",
    "TwoSampleTPipeline",
    "accept_count",
    "adaptz_decisions",
    "bh_decisions",
    "bh_matched_sample_size",
    "calibrate_gap_sb",
    "cutoffs",
    "decide",
    "empirical_null_cdf",
    "error_counts",
    "estimate_pi0_jincai",
    "estimate_pi0_storey",
    "estimated_lfdr",
    "fdp",
    "fixed_sample_analysis",
    "fnp",
    "gap_ao_cutoff",
    "generate_stage",
    "generate_truth",
    "kde",
    "make_example",
    "one_sample_t",
    "oracle_lfdr",
    "preprocess",
    "qhat",
    "qhat_prime",
    "quantile_normalize",
    "read_case_control_csv",
    "reject_count",
    "replay",
    "run_experiment",
    "savings_pct",
    "select_s",
    "standardize_samples",
    "stop_check",
    "sweep_m",
    "synthetic_case_control",
    "two_sample_t",
    "update_llr",
    "write_case_control_csv",
    "zscore",
]
