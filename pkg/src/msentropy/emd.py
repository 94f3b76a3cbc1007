"""Empirical mode decomposition and band reconstruction.

The decomposition peels oscillatory modes off a signal, fastest first, by
iteratively subtracting the mean of the upper and lower extremum
envelopes (cubic splines) until the candidate's change between sifting
passes is small.  What remains at the end is a low-order residue that is
monotone or otherwise extremum-free; it is never counted as a mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import EmptyBand, InvalidArgument, MonotoneSignal, SignalTooShort
from .signals import TimeSeries

__all__ = [
    "EmdConfig",
    "ImfDecomposition",
    "find_extrema",
    "envelope_mean",
    "decompose",
    "reconstruct_band",
]

_MIN_DECOMPOSE_LEN = 16


@dataclass(frozen=True)
class EmdConfig:
    """Sifting controls.

    ``sift_sd_threshold`` bounds the pointwise normalized squared change
    between consecutive sifting candidates; once the sum drops below it
    the candidate is accepted as a mode.  ``band`` selects which modes
    (1-based, fastest first) a reconstruction keeps.
    """

    max_imfs: int = 20
    max_sift_iters: int = 100
    sift_sd_threshold: float = 0.2
    band: tuple[int, int] = (5, 10)

    def __post_init__(self):
        if not (isinstance(self.max_imfs, int) and self.max_imfs >= 1):
            raise InvalidArgument("max_imfs must be a positive integer")
        if not (isinstance(self.max_sift_iters, int) and self.max_sift_iters >= 1):
            raise InvalidArgument("max_sift_iters must be a positive integer")
        if not (math.isfinite(self.sift_sd_threshold) and self.sift_sd_threshold > 0):
            raise InvalidArgument("sift_sd_threshold must be positive")
        lo, hi = self.band
        if not (isinstance(lo, int) and isinstance(hi, int) and 1 <= lo <= hi):
            raise InvalidArgument(f"band must be integers 1 <= lo <= hi, got {self.band}")


@dataclass(frozen=True)
class ImfDecomposition:
    """Modes plus residue; summing everything reproduces the input."""

    imfs: tuple[TimeSeries, ...]
    residue: TimeSeries
    sift_counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "imfs", tuple(self.imfs))
        object.__setattr__(self, "sift_counts", tuple(self.sift_counts))
        n = len(self.residue)
        if any(len(imf) != n for imf in self.imfs):
            raise InvalidArgument("modes and residue must share one length")
        if len(self.sift_counts) != len(self.imfs):
            raise InvalidArgument("need one sift count per mode")

    @property
    def n_imfs(self) -> int:
        return len(self.imfs)


def _find_extrema_arr(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of strict interior maxima and minima.

    A plateau of equal values flanked by lower (higher) neighbours counts
    as a single maximum (minimum) at the plateau midpoint, rounding down.
    Endpoints never qualify.
    """
    n = len(v)
    # compress runs of equal values: run r covers starts[r]..ends[r]
    change = np.flatnonzero(np.diff(v) != 0.0)
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [n - 1]))
    vals = v[starts]
    maxima = []
    minima = []
    for r in range(1, len(starts) - 1):
        prev_v = vals[r - 1]
        next_v = vals[r + 1]
        here = vals[r]
        if prev_v < here > next_v:
            maxima.append((starts[r] + ends[r]) // 2)
        elif prev_v > here < next_v:
            minima.append((starts[r] + ends[r]) // 2)
    return (np.asarray(maxima, dtype=np.int64),
            np.asarray(minima, dtype=np.int64))


def find_extrema(x: TimeSeries | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Strict interior maxima and minima of a record.

    Returns
    -------
    (maxima, minima)
        Two increasing index arrays.  A monotone record yields two empty
        arrays.  Fewer than 3 samples cannot host an interior extremum.
    """
    v = x.samples if isinstance(x, TimeSeries) else np.asarray(x, dtype=np.float64)
    if len(v) < 3:
        raise SignalTooShort(f"need at least 3 samples, got {len(v)}")
    return _find_extrema_arr(v)


def _mirror_extend(idx: np.ndarray, vals: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Reflect up to two extrema about each endpoint so the spline is
    # anchored outside the observed range instead of extrapolating.
    pos = [idx.astype(np.float64)]
    val = [vals]
    k = min(2, len(idx))
    left = -idx[:k][::-1].astype(np.float64)
    pos.insert(0, left)
    val.insert(0, vals[:k][::-1])
    right = (2.0 * (n - 1) - idx[-k:][::-1]).astype(np.float64)
    pos.append(right)
    val.append(vals[-k:][::-1])
    p = np.concatenate(pos)
    w = np.concatenate(val)
    order = np.argsort(p)
    return p[order], w[order]


def _envelope_mean_arr(v: np.ndarray) -> np.ndarray:
    max_idx, min_idx = _find_extrema_arr(v)
    if len(max_idx) < 1 or len(min_idx) < 1:
        raise MonotoneSignal(
            "record has no interior extremum pair; envelopes are undefined")
    n = len(v)
    t = np.arange(n, dtype=np.float64)
    up_x, up_y = _mirror_extend(max_idx, v[max_idx], n)
    lo_x, lo_y = _mirror_extend(min_idx, v[min_idx], n)
    upper = CubicSpline(up_x, up_y, bc_type="natural")(t)
    lower = CubicSpline(lo_x, lo_y, bc_type="natural")(t)
    return 0.5 * (upper + lower)


def envelope_mean(x: TimeSeries | np.ndarray) -> np.ndarray:
    """Mean of the upper and lower extremum envelopes, sample by sample.

    Envelopes are natural cubic splines through the maxima (resp. minima),
    with up to two extrema mirrored beyond each endpoint to anchor the
    boundary.  Raises ``MonotoneSignal`` when either extremum family is
    empty.
    """
    v = x.samples if isinstance(x, TimeSeries) else np.asarray(x, dtype=np.float64)
    if len(v) < 3:
        raise SignalTooShort(f"need at least 3 samples, got {len(v)}")
    return _envelope_mean_arr(v)


def _sift_sd(new: np.ndarray, old: np.ndarray) -> float:
    # Energy ratio of the change between consecutive candidates; the
    # pointwise form diverges wherever a candidate crosses zero, so the
    # ratio of sums is used instead.  Amplitude-scale invariant.
    denom = float(np.sum(old * old)) + 1e-300
    return float(np.sum((new - old) ** 2)) / denom


def _is_monotone(v: np.ndarray) -> bool:
    max_idx, min_idx = _find_extrema_arr(v)
    return len(max_idx) == 0 or len(min_idx) == 0


def decompose(x: TimeSeries, config: EmdConfig = EmdConfig()) -> ImfDecomposition:
    """Decompose a record into oscillatory modes plus a residue.

    Each mode is produced by sifting: repeatedly subtracting the envelope
    mean from the current candidate until the normalized squared change
    between passes falls below ``config.sift_sd_threshold`` or
    ``config.max_sift_iters`` passes have run.  Extraction stops when
    ``config.max_imfs`` modes exist or the residue has no extremum pair
    left.  The input is recovered exactly by summing modes and residue.
    """
    if len(x) < _MIN_DECOMPOSE_LEN:
        raise SignalTooShort(
            f"need at least {_MIN_DECOMPOSE_LEN} samples to decompose, got {len(x)}")
    residue = x.samples.copy()
    imfs: list[np.ndarray] = []
    counts: list[int] = []
    for _ in range(config.max_imfs):
        if _is_monotone(residue):
            break
        cand = residue.copy()
        iters = 0
        while iters < config.max_sift_iters:
            try:
                mean_env = _envelope_mean_arr(cand)
            except MonotoneSignal:
                break
            new = cand - mean_env
            iters += 1
            sd = _sift_sd(new, cand)
            cand = new
            if sd < config.sift_sd_threshold:
                break
        imfs.append(cand)
        counts.append(iters)
        residue = residue - cand
    return ImfDecomposition(
        imfs=tuple(TimeSeries(imf, fs=x.fs, label=x.label) for imf in imfs),
        residue=TimeSeries(residue, fs=x.fs, label=x.label),
        sift_counts=tuple(counts),
    )


def reconstruct_band(d: ImfDecomposition, lo: int, hi: int) -> TimeSeries:
    """Sum modes ``lo..hi`` (1-based, fastest first) into one record.

    ``hi`` beyond the available mode count is clipped; ``lo`` beyond it
    raises ``EmptyBand``.  The residue is never included.
    """
    if not (isinstance(lo, (int, np.integer)) and isinstance(hi, (int, np.integer))):
        raise InvalidArgument("band edges must be integers")
    if not (1 <= lo <= hi):
        raise InvalidArgument(f"need 1 <= lo <= hi, got ({lo}, {hi})")
    if lo > d.n_imfs:
        raise EmptyBand(
            f"band starts at mode {lo} but only {d.n_imfs} modes exist")
    hi_eff = min(int(hi), d.n_imfs)
    total = np.zeros(len(d.residue))
    for imf in d.imfs[lo - 1:hi_eff]:
        total = total + imf.samples
    return TimeSeries(total, fs=d.residue.fs, label=d.residue.label)
