"""Multiscale entropy toolkit for EEG-like signals.

Estimators (fuzzy, sample, approximate, dispersion) over coarse-grained
or filter-decimated scale series, a mode-decomposition front end with
band reconstruction, relative-to-baseline complexity curves, and a
seeded multi-subject stimulation experiment with its statistics.
"""
from .emd import EmdConfig, ImfDecomposition, decompose, envelope_mean, find_extrema, reconstruct_band
from .io import (experiment_to_dict, read_epoch_set, read_experiment_json,
                 read_profile_csv, read_table_csv, read_timeseries_csv,
                 write_epoch_set, write_experiment_json, write_figure_csvs,
                 write_imfs, write_profile_csv, write_stats_csv,
                 write_timeseries_csv)
from .entropy import (ApproximateParams, DispersionParams, EntropyProfile,
                      FuzzyParams, SampleParams, ScaleRange,
                      approximate_entropy, coarse_grain, dispersion_entropy,
                      fuzzy_entropy, multiscale_profile, refined_scale,
                      sample_entropy)
from .errors import (AnalysisError, DegenerateSignal, DegenerateVariance,
                     EmptyBand, IncompatibleProfiles, InputFormatError,
                     InvalidArgument, MethodFailure, MonotoneSignal,
                     SignalTooShort, TooFewGroups, TooFewSamples)
from .pipeline import (ChannelResult, ComplexityProfile, ConditionResult,
                       ConditionRun, ExperimentConfig, ExperimentResult,
                       MethodId, PipelineConfig, RelativeComplexityCurve,
                       inherent_fuzzy_entropy, method_profile,
                       relative_complexity, run_condition, run_experiment,
                       subject_epochs)
from .signals import (EpochSet, ProtocolSpec, TimeSeries, decimate,
                      fir_filter, generate_noise, generate_ssvep_protocol,
                      reject_artifacts, zscore)
from .stats import (StatReport, TestResult, adjust_report, fdr_bh,
                    ks_normality, one_way_anova, paired_t, tukey_hsd)

__version__ = "1.0.0"

__all__ = [
    "AnalysisError", "ApproximateParams", "ChannelResult",
    "ComplexityProfile", "ConditionResult", "ConditionRun",
    "DegenerateSignal", "DegenerateVariance", "DispersionParams",
    "EmdConfig", "EmptyBand", "EntropyProfile", "EpochSet",
    "ExperimentConfig", "ExperimentResult", "FuzzyParams",
    "ImfDecomposition", "IncompatibleProfiles", "InputFormatError",
    "InvalidArgument", "MethodFailure", "MethodId", "MonotoneSignal",
    "experiment_to_dict", "read_epoch_set", "read_experiment_json",
    "read_profile_csv", "read_table_csv", "read_timeseries_csv",
    "write_epoch_set", "write_experiment_json", "write_figure_csvs",
    "write_imfs", "write_profile_csv", "write_stats_csv", "write_timeseries_csv",
    "PipelineConfig", "ProtocolSpec", "RelativeComplexityCurve",
    "SampleParams", "ScaleRange", "SignalTooShort", "StatReport",
    "TestResult", "TimeSeries", "TooFewGroups", "TooFewSamples",
    "adjust_report", "approximate_entropy", "coarse_grain", "decimate",
    "decompose", "dispersion_entropy", "envelope_mean", "fdr_bh",
    "find_extrema", "fir_filter", "fuzzy_entropy", "generate_noise",
    "generate_ssvep_protocol", "inherent_fuzzy_entropy", "ks_normality",
    "method_profile", "multiscale_profile", "one_way_anova", "paired_t",
    "refined_scale", "reject_artifacts", "relative_complexity",
    "run_condition", "run_experiment", "sample_entropy", "subject_epochs",
    "tukey_hsd", "zscore",
]
