"""Statistical battery: normality screen, location tests, multiplicity control.

Conventions: sample standard deviations (divisor n-1) everywhere in this
module, two-tailed p-values, natural pairing by position.  NaN inputs are
treated as missing -- dropped pairwise for the paired test, dropped
within groups otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import special
from .errors import (DegenerateVariance, InvalidArgument, TooFewGroups,
                     TooFewSamples)

__all__ = [
    "TestResult",
    "StatReport",
    "ks_normality",
    "paired_t",
    "one_way_anova",
    "tukey_hsd",
    "fdr_bh",
]


@dataclass(frozen=True)
class TestResult:
    """Outcome of a single hypothesis test.

    ``df`` is a float for t-type tests, a (numerator, denominator) pair
    for F-type tests, and the sample size for the distribution screen.
    ``p_adjusted`` stays None until a multiplicity correction fills it;
    ``reject`` refers to the adjusted p when present, the raw one
    otherwise.
    """

    name: str
    statistic: float
    p_raw: float
    df: float | tuple[float, float] | None = None
    p_adjusted: float | None = None
    reject: bool = False
    scale: int | None = None

    def adjusted(self, p_adj: float, alpha: float) -> "TestResult":
        return TestResult(self.name, self.statistic, self.p_raw, self.df,
                          p_adj, bool(p_adj < alpha), self.scale)


@dataclass(frozen=True)
class StatReport:
    """A family of related tests plus the correction applied across them."""

    family: str
    alpha: float
    correction: str
    tests: tuple[TestResult, ...]

    def __post_init__(self):
        object.__setattr__(self, "tests", tuple(self.tests))
        if not (0.0 < self.alpha < 1.0):
            raise InvalidArgument(f"alpha must be in (0, 1), got {self.alpha}")


def _clean(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    return arr[~np.isnan(arr)]


def ks_normality(x, alpha: float = 0.05, standardize: bool = True) -> TestResult:
    """One-sample Kolmogorov test against the standard normal.

    With ``standardize=True`` (default) the sample is first centered and
    scaled by its own mean and sample SD; the reported p-value uses the
    asymptotic Kolmogorov distribution with a small-sample effective-n
    correction, which is conservative for fitted parameters.
    """
    arr = _clean(x)
    n = arr.size
    if n < 5:
        raise TooFewSamples(f"need at least 5 values, got {n}")
    if standardize:
        sd = arr.std(ddof=1)
        if sd == 0.0:
            raise DegenerateVariance("constant sample cannot be standardized")
        arr = (arr - arr.mean()) / sd
    z = np.sort(arr)
    cdf = np.array([special.norm_cdf(v) for v in z])
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - cdf))
    d_minus = float(np.max(cdf - (i - 1) / n))
    d = max(d_plus, d_minus)
    p = special.kolmogorov_p(d, n)
    return TestResult("ks-normality", d, p, df=float(n),
                      reject=bool(p < alpha))


def paired_t(x, y, alpha: float = 0.05) -> TestResult:
    """Two-tailed paired t test on positionally matched samples.

    Pairs are dropped when either member is NaN.  A zero-SD difference
    vector is degenerate unless every difference is exactly zero, in
    which case t = 0 and p = 1.
    """
    ax = np.asarray(x, dtype=np.float64).ravel()
    ay = np.asarray(y, dtype=np.float64).ravel()
    if ax.size != ay.size:
        raise InvalidArgument(f"length mismatch: {ax.size} vs {ay.size}")
    keep = ~(np.isnan(ax) | np.isnan(ay))
    d = ax[keep] - ay[keep]
    n = d.size
    if n < 2:
        raise TooFewSamples(f"need at least 2 complete pairs, got {n}")
    sd = d.std(ddof=1)
    if sd == 0.0:
        if d[0] == 0.0:
            return TestResult("paired-t", 0.0, 1.0, df=float(n - 1))
        raise DegenerateVariance(
            "differences are constant and non-zero; t is unbounded")
    t = d.mean() / (sd / math.sqrt(n))
    p = special.student_t_two_tailed(t, n - 1)
    return TestResult("paired-t", float(t), float(p), df=float(n - 1),
                      reject=bool(p < alpha))


def _group_arrays(groups) -> list[np.ndarray]:
    cleaned = [_clean(g) for g in groups]
    if len(cleaned) < 2:
        raise TooFewGroups(f"need at least 2 groups, got {len(cleaned)}")
    for gi, g in enumerate(cleaned):
        if g.size < 2:
            raise TooFewSamples(f"group {gi} has {g.size} usable values, need 2")
    return cleaned


def _anova_terms(cleaned: list[np.ndarray]):
    k = len(cleaned)
    n_total = sum(g.size for g in cleaned)
    grand = sum(float(g.sum()) for g in cleaned) / n_total
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in cleaned)
    ss_within = sum(float(((g - g.mean()) ** 2).sum()) for g in cleaned)
    df_b = k - 1
    df_w = n_total - k
    return ss_between / df_b, ss_within / df_w, df_b, df_w


def one_way_anova(groups, alpha: float = 0.05) -> TestResult:
    """One-way fixed-effects ANOVA across two or more groups."""
    cleaned = _group_arrays(groups)
    msb, msw, df_b, df_w = _anova_terms(cleaned)
    if msw == 0.0:
        if msb == 0.0:
            raise DegenerateVariance("no variance within or between groups")
        return TestResult("anova", math.inf, 0.0, df=(float(df_b), float(df_w)),
                          reject=True)
    f = msb / msw
    p = special.f_sf(f, df_b, df_w)
    return TestResult("anova", float(f), float(p), df=(float(df_b), float(df_w)),
                      reject=bool(p < alpha))


def tukey_hsd(groups, pair: tuple[int, int], alpha: float = 0.05) -> TestResult:
    """Tukey HSD comparison of one group pair within a k-group design.

    The standard error pools the within-group variance across all k
    groups (the ANOVA MSW); the p-value comes from the studentized range
    distribution with k groups and N-k degrees of freedom, so it is
    already corrected for the number of implicit pairwise comparisons.
    """
    cleaned = _group_arrays(groups)
    k = len(cleaned)
    i, j = pair
    if not (0 <= i < k and 0 <= j < k and i != j):
        raise InvalidArgument(f"pair {pair} invalid for {k} groups")
    msb, msw, df_b, df_w = _anova_terms(cleaned)
    if msw == 0.0:
        if cleaned[i].mean() == cleaned[j].mean():
            raise DegenerateVariance("no variance within groups and equal means")
        return TestResult("tukey-hsd", math.inf, 0.0, df=float(df_w), reject=True)
    gi, gj = cleaned[i], cleaned[j]
    se = math.sqrt(msw / 2.0 * (1.0 / gi.size + 1.0 / gj.size))
    q = abs(gi.mean() - gj.mean()) / se
    p = 1.0 - special.studentized_range_cdf(q, k, df_w)
    p = min(1.0, max(0.0, p))
    return TestResult("tukey-hsd", float(q), float(p), df=float(df_w),
                      reject=bool(p < alpha))


def fdr_bh(p_values, q: float = 0.05) -> tuple[list[float], list[bool]]:
    """Benjamini-Hochberg step-up false discovery rate control.

    Returns adjusted p-values (monotone step-up, clipped to 1) and
    rejection flags, both in the original order.
    """
    p = np.asarray(list(p_values), dtype=np.float64)
    if p.size == 0:
        raise InvalidArgument("need at least one p-value")
    if np.any(np.isnan(p)) or np.any((p < 0) | (p > 1)):
        raise InvalidArgument("p-values must lie in [0, 1]")
    if not (0.0 < q < 1.0):
        raise InvalidArgument(f"q must be in (0, 1), got {q}")
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order]
    scaled = ranked * m / np.arange(1, m + 1)
    adj = np.minimum.accumulate(scaled[::-1])[::-1]
    adj = np.minimum(adj, 1.0)
    adjusted = np.empty(m)
    adjusted[order] = adj
    reject = adjusted < q
    return [float(v) for v in adjusted], [bool(v) for v in reject]


def adjust_report(tests, family: str, alpha: float = 0.05) -> StatReport:
    """Apply BH-FDR across a list of TestResults and bundle them."""
    tests = list(tests)
    adjusted, _ = fdr_bh([t.p_raw for t in tests], q=alpha)
    out = tuple(t.adjusted(p_adj, alpha) for t, p_adj in zip(tests, adjusted))
    return StatReport(family=family, alpha=alpha, correction="bh-fdr", tests=out)
