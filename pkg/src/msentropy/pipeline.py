"""Analysis methods and the repetitive-stimulation experiment driver.

Seven multiscale methods share one complexity-profile interface; the
flagship combines mode decomposition (detrending/denoising by mode-band
reconstruction) with the fuzzy estimator over coarse-grained scales, and
the six competitors drop the decomposition stage or swap the estimator
or the scale transform.

The experiment driver synthesizes per-subject epoch sets for each
condition and derived channel, computes relative complexity against the
baseline epochs, aggregates across subjects, and attaches the
statistical battery.  Everything is reproducible from one master seed;
worker parallelism never changes the numbers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .emd import EmdConfig, decompose, reconstruct_band
from .entropy import (ApproximateParams, DispersionParams, EntropyProfile,
                      FuzzyParams, SampleParams, ScaleRange, multiscale_profile)
from .errors import AnalysisError, IncompatibleProfiles, InvalidArgument
from .signals import EpochSet, ProtocolSpec, TimeSeries, generate_ssvep_protocol, zscore
from .stats import (StatReport, TestResult, adjust_report, ks_normality,
                    one_way_anova, paired_t, tukey_hsd)

__all__ = [
    "MethodId",
    "PipelineConfig",
    "ExperimentConfig",
    "ComplexityProfile",
    "RelativeComplexityCurve",
    "ConditionRun",
    "ChannelResult",
    "ConditionResult",
    "ExperimentResult",
    "inherent_fuzzy_entropy",
    "method_profile",
    "relative_complexity",
    "run_condition",
    "run_experiment",
]


class MethodId(str, Enum):
    """The seven multiscale complexity methods."""

    MIFE = "mife"   # mode-band detrend + fuzzy, coarse scales
    MDE = "mde"     # dispersion, coarse scales
    MAE = "mae"     # approximate, coarse scales
    MSE = "mse"     # sample, coarse scales
    MFE = "mfe"     # fuzzy, coarse scales (no detrend stage)
    RMSE = "rmse"   # sample, filtered scales
    RMFE = "rmfe"   # fuzzy, filtered scales


@dataclass(frozen=True)
class PipelineConfig:
    """Parameters shared by every method invocation."""

    emd: EmdConfig = EmdConfig()
    fuzzy: FuzzyParams = FuzzyParams()
    sample: SampleParams = SampleParams()
    approximate: ApproximateParams = ApproximateParams()
    dispersion: DispersionParams = DispersionParams()
    scales: ScaleRange = ScaleRange()
    r_mode: str = "per-scale"


@dataclass(frozen=True)
class ComplexityProfile:
    """An entropy profile labeled with its epoch's role in the protocol."""

    condition: str
    stimulus_index: int | None  # 1-based; None for baseline epochs
    profile: EntropyProfile

    def __post_init__(self):
        if self.stimulus_index is not None and self.stimulus_index < 1:
            raise InvalidArgument("stimulus_index is 1-based")


@dataclass(frozen=True)
class RelativeComplexityCurve:
    """Per-scale complexity of one stimulus epoch relative to baseline."""

    stimulus_index: int
    scales: ScaleRange
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size != len(self.scales):
            raise InvalidArgument("need one value per scale")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


@contextmanager
def _stage(name: str):
    try:
        yield
    except AnalysisError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def inherent_fuzzy_entropy(x: TimeSeries,
                           cfg: PipelineConfig = PipelineConfig(),
                           *, strict: bool = False) -> EntropyProfile:
    """Flagship method: normalize, decompose, reconstruct a mode band,
    then run the fuzzy estimator over coarse-grained scales.

    Errors raised by a stage carry that stage's name (``normalize``,
    ``emd``, ``band``, ``profile``) so callers can report where a record
    failed.
    """
    with _stage("normalize"):
        z = zscore(x)
    with _stage("emd"):
        dec = decompose(z, cfg.emd)
    with _stage("band"):
        lo, hi = cfg.emd.band
        recon = reconstruct_band(dec, lo, hi)
    with _stage("profile"):
        prof = multiscale_profile(recon, cfg.scales, kernel="fuzzy",
                                  params=cfg.fuzzy, scaling="coarse",
                                  r_mode=cfg.r_mode, strict=strict)
    return replace(prof, method=MethodId.MIFE.value)


def _method_id(method) -> MethodId:
    try:
        return MethodId(method)
    except ValueError:
        names = ", ".join(m.value for m in MethodId)
        raise InvalidArgument(f"unknown method {method!r}; choose one of {names}") from None


def method_profile(x: TimeSeries, method: MethodId | str,
                   cfg: PipelineConfig = PipelineConfig(),
                   *, strict: bool = False) -> EntropyProfile:
    """Compute one method's complexity profile for one record.

    ``strict`` propagates per-scale estimation failures instead of
    recording NaN; batch runs keep the default and tolerate them.
    """
    m = _method_id(method)
    if m is MethodId.MIFE:
        return inherent_fuzzy_entropy(x, cfg, strict=strict)
    kernel, params, scaling = {
        MethodId.MDE: ("dispersion", cfg.dispersion, "coarse"),
        MethodId.MAE: ("approximate", cfg.approximate, "coarse"),
        MethodId.MSE: ("sample", cfg.sample, "coarse"),
        MethodId.MFE: ("fuzzy", cfg.fuzzy, "coarse"),
        MethodId.RMSE: ("sample", cfg.sample, "refined"),
        MethodId.RMFE: ("fuzzy", cfg.fuzzy, "refined"),
    }[m]
    with _stage("profile"):
        prof = multiscale_profile(x, cfg.scales, kernel=kernel, params=params,
                                  scaling=scaling, r_mode=cfg.r_mode,
                                  strict=strict)
    return replace(prof, method=m.value)


def relative_complexity(stimulus_profiles, baseline_profiles) -> list[RelativeComplexityCurve]:
    """Subtract the mean baseline profile from each stimulus profile.

    The baseline is the per-scale mean over the baseline profiles,
    ignoring NaN entries (a scale NaN in every baseline stays NaN).  All
    profiles must share an identical scale range.
    """
    stims = list(stimulus_profiles)
    bases = list(baseline_profiles)
    if not stims or not bases:
        raise InvalidArgument("need at least one stimulus and one baseline profile")
    ref = stims[0].scales
    for p in stims + bases:
        if p.scales != ref:
            raise IncompatibleProfiles(
                f"scale ranges differ: {p.scales.scales} vs {ref.scales}")
    base_matrix = np.vstack([p.values for p in bases])
    with np.errstate(invalid="ignore"):
        valid = ~np.isnan(base_matrix)
        counts = valid.sum(axis=0)
        sums = np.where(valid, base_matrix, 0.0).sum(axis=0)
        baseline = np.where(counts > 0, sums / np.maximum(counts, 1), math.nan)
    out = []
    for i, p in enumerate(stims, start=1):
        out.append(RelativeComplexityCurve(i, ref, p.values - baseline))
    return out


@dataclass(frozen=True)
class ConditionRun:
    """Profiles and relative-complexity curves from one epoch set."""

    baseline: tuple[ComplexityProfile, ...]
    stimulus: tuple[ComplexityProfile, ...]
    curves: tuple[RelativeComplexityCurve, ...]
    failures: dict[str, str]  # epoch key -> error tag


def _nan_profile(scales: ScaleRange, method: str) -> EntropyProfile:
    return EntropyProfile(method, "coarse", scales,
                          np.full(len(scales), math.nan))


def run_condition(epochs: EpochSet, method: MethodId | str,
                  cfg: PipelineConfig = PipelineConfig()) -> ConditionRun:
    """Profile every epoch of one condition and derive relative complexity.

    A single epoch failing does not abort the run: its profile becomes
    all-NaN, the failure tag is recorded under ``baseline_<k>`` or
    ``stim_<i>`` (1-based), and the curves carry NaN where the failed
    epoch would have contributed.
    """
    m = _method_id(method)
    failures: dict[str, str] = {}
    label = epochs.baseline_epochs[0].label or ""

    def one(ts: TimeSeries, key: str) -> EntropyProfile:
        try:
            prof = method_profile(ts, m, cfg)
        except AnalysisError as exc:
            failures[key] = exc.tag
            return _nan_profile(cfg.scales, m.value)
        if np.all(np.isnan(prof.values)):
            # every scale was swallowed as a marker; rerun strictly to
            # recover the underlying error tag for the log
            try:
                method_profile(ts, m, cfg, strict=True)
                failures[key] = "undefined"
            except AnalysisError as exc:
                failures[key] = exc.tag
        return prof

    base_profiles = [one(ts, f"baseline_{k}")
                     for k, ts in enumerate(epochs.baseline_epochs, start=1)]
    stim_profiles = [one(ts, f"stim_{i}")
                     for i, ts in enumerate(epochs.stimulus_epochs, start=1)]
    curves = relative_complexity(stim_profiles, base_profiles)
    return ConditionRun(
        baseline=tuple(ComplexityProfile(label, None, p) for p in base_profiles),
        stimulus=tuple(ComplexityProfile(label, i, p)
                       for i, p in enumerate(stim_profiles, start=1)),
        curves=tuple(curves),
        failures=failures,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment-level knobs on top of the per-record pipeline."""

    pipeline: PipelineConfig = PipelineConfig()
    master_seed: int = 0
    workers: int = 1
    channels: tuple[str, ...] = ("Oz", "Fpz")
    frontal_gain: float = 0.3
    alpha: float = 0.05

    def __post_init__(self):
        if not (isinstance(self.workers, int) and self.workers >= 1):
            raise InvalidArgument("workers must be a positive integer")
        if not self.channels:
            raise InvalidArgument("need at least one channel")
        for ch in self.channels:
            if ch not in ("Oz", "Fpz"):
                raise InvalidArgument(
                    f"unknown channel {ch!r}; the synthetic montage has Oz and Fpz")
        if not (0.0 < self.frontal_gain):
            raise InvalidArgument("frontal_gain must be positive")


@dataclass(frozen=True)
class ChannelResult:
    """Aggregated relative complexity for one condition and channel."""

    per_subject: np.ndarray   # (n_subjects, n_stimuli, n_scales), NaN = undefined
    group_mean: np.ndarray    # (n_stimuli, n_scales), NaN-aware mean
    group_sd: np.ndarray      # (n_stimuli, n_scales), sample SD over subjects
    reports: dict[str, StatReport]
    failures: dict[str, str]  # "s<subject>/<epoch>" -> error tag


@dataclass(frozen=True)
class ConditionResult:
    protocol: ProtocolSpec
    channels: dict[str, ChannelResult]


@dataclass(frozen=True)
class ExperimentResult:
    method: str
    scales: ScaleRange
    master_seed: int
    n_subjects: int
    channels: tuple[str, ...]
    conditions: dict[str, ConditionResult]
    cross: dict[str, StatReport]


_CHANNEL_CODE = {"Oz": 0, "Fpz": 1}


def subject_epochs(spec: ProtocolSpec, master_seed: int, subject: int,
                   cond_code: int, channel: str, frontal_gain: float) -> EpochSet:
    # Epoch synthesis is keyed only by (master seed, subject, condition,
    # channel) -- never by method -- so method comparisons see identical
    # data.  The frontal channel carries the evoked response attenuated
    # by frontal_gain with its own independent noise.
    seed = int(np.random.SeedSequence(
        [int(master_seed), int(subject), int(cond_code),
         _CHANNEL_CODE[channel]]).generate_state(1)[0])
    gain = 1.0 if channel == "Oz" else frontal_gain
    task_spec = replace(spec, seed=seed, snr0=spec.snr0 * gain)
    return generate_ssvep_protocol(task_spec)


def _run_task(args):
    (spec, method, pipeline_cfg, master_seed, subject, cond_code, channel,
     frontal_gain) = args
    epochs = subject_epochs(spec, master_seed, subject, cond_code, channel,
                            frontal_gain)
    run = run_condition(epochs, method, pipeline_cfg)
    matrix = np.vstack([c.values for c in run.curves])
    failures = {f"s{subject + 1}/{k}": v for k, v in run.failures.items()}
    return subject, matrix, failures


def _nan_mean_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    # NaN-ignoring mean that stays quiet on all-NaN slices
    valid = ~np.isnan(arr)
    n = valid.sum(axis=axis)
    sums = np.where(valid, arr, 0.0).sum(axis=axis)
    return np.where(n > 0, sums / np.maximum(n, 1), math.nan)


def _nan_mean_sd(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # stack: (n_subjects, n_stimuli, n_scales); mean ignores NaN, SD is
    # the sample SD (divisor n-1) over the valid entries, NaN when fewer
    # than 2 remain.
    valid = ~np.isnan(stack)
    n = valid.sum(axis=0)
    sums = np.where(valid, stack, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(n > 0, sums / np.maximum(n, 1), math.nan)
        centered = np.where(valid, stack - mean[None, :, :], 0.0)
        ss = (centered ** 2).sum(axis=0)
        sd = np.where(n > 1, np.sqrt(ss / np.maximum(n - 1, 1)), math.nan)
    return mean, sd


def _safe_test(fn, *args, name: str, scale: int, **kwargs) -> TestResult:
    try:
        res = fn(*args, **kwargs)
        return replace(res, scale=scale)
    except AnalysisError:
        return TestResult(name, math.nan, math.nan, scale=scale)


def _family_with_fdr(tests: list[TestResult], family: str, alpha: float) -> StatReport:
    # scales whose test could not run are excluded from the correction
    from .stats import fdr_bh
    usable = [i for i, t in enumerate(tests) if math.isfinite(t.p_raw)]
    out = list(tests)
    if usable:
        adjusted, _ = fdr_bh([tests[i].p_raw for i in usable], q=alpha)
        for i, p_adj in zip(usable, adjusted):
            out[i] = tests[i].adjusted(p_adj, alpha)
    return StatReport(family=family, alpha=alpha, correction="bh-fdr",
                      tests=tuple(out))


def _channel_reports(per_subject: np.ndarray, scales: ScaleRange,
                     alpha: float) -> dict[str, StatReport]:
    n_stim = per_subject.shape[1]
    anova_tests = []
    tukey_tests = []
    ks_tests = []
    subj_means = _nan_mean_axis(per_subject, axis=1)
    for pos, tau in enumerate(scales):
        groups = [per_subject[:, s, pos] for s in range(n_stim)]
        anova_tests.append(_safe_test(one_way_anova, groups, alpha=alpha,
                                      name="anova", scale=tau))
        tukey_tests.append(_safe_test(tukey_hsd, groups, (0, n_stim - 1),
                                      alpha=alpha, name="tukey-hsd", scale=tau))
        ks_tests.append(_safe_test(ks_normality, subj_means[:, pos], alpha=alpha,
                                   name="ks-normality", scale=tau))
    return {
        "anova": _family_with_fdr(anova_tests, "anova-across-stimuli", alpha),
        "tukey_first_vs_last": _family_with_fdr(
            tukey_tests, "tukey-first-vs-last", alpha),
        "ks": StatReport(family="ks-normality", alpha=alpha, correction="none",
                         tests=tuple(ks_tests)),
    }


def run_experiment(protocols: dict[str, ProtocolSpec], n_subjects: int,
                   method: MethodId | str,
                   cfg: ExperimentConfig = ExperimentConfig()) -> ExperimentResult:
    """Run the repetitive-stimulation experiment on synthetic subjects.

    Parameters
    ----------
    protocols : dict of condition label -> ProtocolSpec
        Typically two conditions; labels key the result.
    n_subjects : int
        Virtual subjects; each gets independent noise via seeds derived
        from ``(master_seed, subject, condition, channel)``.
    method : MethodId or str
        The complexity method applied to every epoch.
    cfg : ExperimentConfig

    Returns
    -------
    ExperimentResult
        Per-subject relative-complexity curves, NaN-aware group mean and
        sample SD per stimulus and scale, per-condition test reports
        (ANOVA across stimuli, first-vs-last Tukey, normality screen;
        FDR within each 20-scale family), and, with exactly two
        conditions, a paired t family comparing them per channel.
        Results are byte-stable across ``cfg.workers`` settings.
    """
    if not protocols:
        raise InvalidArgument("need at least one condition protocol")
    if not (isinstance(n_subjects, int) and n_subjects >= 2):
        raise InvalidArgument("need at least 2 subjects for the group tests")
    m = _method_id(method)
    cond_labels = sorted(protocols)
    scales = cfg.pipeline.scales
    n_stim = {lbl: protocols[lbl].n_stimuli for lbl in cond_labels}

    tasks = []
    for subject in range(n_subjects):
        for ci, lbl in enumerate(cond_labels):
            for ch in cfg.channels:
                tasks.append(((subject, lbl, ch),
                              (protocols[lbl], m, cfg.pipeline,
                               cfg.master_seed, subject, ci, ch,
                               cfg.frontal_gain)))

    results: dict[tuple, tuple] = {}
    if cfg.workers == 1:
        for key, args in tasks:
            subject, matrix, failures = _run_task(args)
            results[key] = (matrix, failures)
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for (key, _), (subject, matrix, failures) in zip(
                    tasks, pool.map(_run_task, [a for _, a in tasks],
                                    chunksize=1)):
                results[key] = (matrix, failures)

    conditions: dict[str, ConditionResult] = {}
    channel_stacks: dict[tuple[str, str], np.ndarray] = {}
    for lbl in cond_labels:
        channels: dict[str, ChannelResult] = {}
        for ch in cfg.channels:
            stack = np.stack([results[(s, lbl, ch)][0] for s in range(n_subjects)])
            failures: dict[str, str] = {}
            for s in range(n_subjects):
                failures.update(results[(s, lbl, ch)][1])
            mean, sd = _nan_mean_sd(stack)
            reports = _channel_reports(stack, scales, cfg.alpha)
            channels[ch] = ChannelResult(stack, mean, sd, reports, failures)
            channel_stacks[(lbl, ch)] = stack
        conditions[lbl] = ConditionResult(protocols[lbl], channels)

    cross: dict[str, StatReport] = {}
    if len(cond_labels) == 2:
        c1, c2 = cond_labels
        for ch in cfg.channels:
            a = _nan_mean_axis(channel_stacks[(c1, ch)], axis=1)  # (n_subj, n_scales)
            b = _nan_mean_axis(channel_stacks[(c2, ch)], axis=1)
            tests = [
                _safe_test(paired_t, a[:, pos], b[:, pos], alpha=cfg.alpha,
                           name="paired-t", scale=tau)
                for pos, tau in enumerate(scales)
            ]
            cross[f"paired-t:{c1}-vs-{c2}:{ch}"] = _family_with_fdr(
                tests, f"paired-t:{c1}-vs-{c2}:{ch}", cfg.alpha)

    return ExperimentResult(
        method=m.value,
        scales=scales,
        master_seed=cfg.master_seed,
        n_subjects=n_subjects,
        channels=tuple(cfg.channels),
        conditions=conditions,
        cross=cross,
    )
