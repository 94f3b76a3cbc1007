"""Time-series container, synthetic signal generation, and preprocessing.

The conventions used throughout this module (and relied on elsewhere):

* sampling rates are Hz, durations seconds, thresholds in signal units;
* the population standard deviation (divisor ``n``) is the SD of record
  for signals -- statistics over subjects use the sample SD instead;
* all randomness flows through explicit integer seeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSignal, InvalidArgument, SignalTooShort

__all__ = [
    "TimeSeries",
    "ProtocolSpec",
    "EpochSet",
    "generate_noise",
    "generate_ssvep_protocol",
    "fir_filter",
    "decimate",
    "zscore",
    "reject_artifacts",
]


@dataclass(frozen=True)
class TimeSeries:
    """An immutable, uniformly sampled 1-D signal.

    Parameters
    ----------
    samples : array-like of float
        Finite sample values; stored as a read-only float64 array.
    fs : float
        Sampling rate in Hz, strictly positive.
    label : str, optional
        Free-form channel or provenance label (e.g. ``"Oz"``).
    """

    samples: np.ndarray
    fs: float
    label: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidArgument("samples must be one-dimensional")
        if arr.size == 0:
            raise InvalidArgument("samples must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgument("samples must be finite")
        fs = float(self.fs)
        if not (math.isfinite(fs) and fs > 0):
            raise InvalidArgument(f"fs must be a positive number, got {self.fs!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "fs", fs)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.fs


@dataclass(frozen=True)
class ProtocolSpec:
    """Parameters of one synthetic flicker-response recording session.

    A session is a set of resting baseline epochs (noise only) followed by
    repeated visual-stimulation epochs.  Stimulus epoch ``i`` (1-based)
    carries a sinusoid at ``flicker_hz`` with amplitude
    ``snr0 * habituation_decay ** (i - 1)`` added to unit-SD noise, so
    ``habituation_decay = 1`` means no response attenuation across
    repetitions and values below 1 model progressively weaker responses.
    ``gap_dur_s`` records the rest interval between stimulations; gaps
    are session timing only and produce no epoch data.
    """

    condition: str
    flicker_hz: float
    n_stimuli: int = 5
    stim_dur_s: float = 10.0
    gap_dur_s: float = 10.0
    n_baseline_epochs: int = 3
    baseline_dur_s: float = 60.0
    fs: float = 250.0
    snr0: float = 2.0
    habituation_decay: float = 0.6
    noise_kind: str = "white"
    seed: int = 0

    def __post_init__(self):
        if not self.condition:
            raise InvalidArgument("condition label must be non-empty")
        for name in ("flicker_hz", "stim_dur_s", "gap_dur_s", "baseline_dur_s",
                     "fs", "habituation_decay"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise InvalidArgument(f"{name} must be positive, got {v!r}")
        if self.habituation_decay > 1.0:
            raise InvalidArgument(
                f"habituation_decay must lie in (0, 1], got {self.habituation_decay}")
        snr0 = float(self.snr0)
        if not (math.isfinite(snr0) and snr0 >= 0):
            raise InvalidArgument(f"snr0 must be non-negative, got {snr0!r}")
        if self.flicker_hz >= self.fs / 2:
            raise InvalidArgument(
                f"flicker_hz {self.flicker_hz} must lie below the Nyquist "
                f"rate {self.fs / 2}")
        for name in ("n_stimuli", "n_baseline_epochs"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and v >= 1):
                raise InvalidArgument(f"{name} must be a positive integer")
        if self.noise_kind not in ("white", "pink"):
            raise InvalidArgument(
                f"noise_kind must be 'white' or 'pink', got {self.noise_kind!r}")


@dataclass(frozen=True)
class EpochSet:
    """Baseline and stimulus epochs from one condition, sharing one rate."""

    baseline_epochs: tuple[TimeSeries, ...]
    stimulus_epochs: tuple[TimeSeries, ...]

    def __post_init__(self):
        object.__setattr__(self, "baseline_epochs", tuple(self.baseline_epochs))
        object.__setattr__(self, "stimulus_epochs", tuple(self.stimulus_epochs))
        if not self.baseline_epochs or not self.stimulus_epochs:
            raise InvalidArgument(
                "need at least one baseline and one stimulus epoch")
        rates = {ts.fs for ts in self.baseline_epochs + self.stimulus_epochs}
        if len(rates) != 1:
            raise InvalidArgument(f"epochs disagree on sampling rate: {rates}")

    @property
    def fs(self) -> float:
        return self.baseline_epochs[0].fs


def _white(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n)


def _pink(rng: np.random.Generator, n: int) -> np.ndarray:
    # Shape white noise in the frequency domain: amplitude ~ 1/sqrt(f)
    # gives a 1/f power spectrum.  DC is zeroed, then the result is
    # rescaled to exactly unit population SD.
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    k = np.arange(spec.size, dtype=np.float64)
    spec[0] = 0.0
    spec[1:] /= np.sqrt(k[1:])
    out = np.fft.irfft(spec, n)
    sd = out.std()
    if sd == 0.0:
        raise DegenerateSignal("noise realization collapsed to a constant")
    return out / sd


def _noise(rng: np.random.Generator, kind: str, n: int) -> np.ndarray:
    if kind == "white":
        return _white(rng, n)
    if kind == "pink":
        return _pink(rng, n)
    raise InvalidArgument(f"unknown noise kind {kind!r}")


def generate_noise(kind: str, n_samples: int, fs: float, seed: int) -> TimeSeries:
    """Generate a reproducible noise record.

    Parameters
    ----------
    kind : {"white", "pink"}
        ``"white"`` draws i.i.d. standard normal samples.  ``"pink"``
        spectrally shapes white noise to a 1/f power spectrum and
        normalizes to unit population SD with zero DC.
    n_samples : int
        Number of samples; at least 2 for pink noise.
    fs : float
        Sampling rate attached to the output.
    seed : int
        Seed for the underlying generator; equal seeds give equal output.
    """
    if kind not in ("white", "pink"):
        raise InvalidArgument(f"kind must be 'white' or 'pink', got {kind!r}")
    if not (isinstance(n_samples, (int, np.integer)) and n_samples >= 2):
        raise InvalidArgument("n_samples must be an integer of at least 2")
    rng = np.random.default_rng(seed)
    return TimeSeries(_noise(rng, kind, int(n_samples)), fs=fs, label=kind)


def generate_ssvep_protocol(spec: ProtocolSpec) -> EpochSet:
    """Synthesize one condition's worth of epochs from a protocol spec.

    Baseline epochs are pure noise.  Stimulus epoch ``i`` (1-based) is
    ``A_i * sin(2*pi*flicker_hz*t) + noise`` with
    ``A_i = snr0 * habituation_decay ** (i - 1)`` and the phase reset to
    zero at each epoch start.  All draws come from a single generator
    seeded with ``spec.seed``, in baseline-then-stimulus order, so the
    whole epoch set is reproducible from the spec alone.
    """
    rng = np.random.default_rng(spec.seed)
    n_base = int(round(spec.baseline_dur_s * spec.fs))
    n_stim = int(round(spec.stim_dur_s * spec.fs))
    if n_base < 2 or n_stim < 2:
        raise SignalTooShort("epoch durations give fewer than 2 samples")

    baselines = []
    for _ in range(spec.n_baseline_epochs):
        baselines.append(TimeSeries(_noise(rng, spec.noise_kind, n_base),
                                    fs=spec.fs, label=spec.condition))
    t = np.arange(n_stim) / spec.fs
    carrier = np.sin(2.0 * np.pi * spec.flicker_hz * t)
    stims = []
    for i in range(1, spec.n_stimuli + 1):
        amp = spec.snr0 * spec.habituation_decay ** (i - 1)
        x = amp * carrier + _noise(rng, spec.noise_kind, n_stim)
        stims.append(TimeSeries(x, fs=spec.fs, label=spec.condition))
    return EpochSet(tuple(baselines), tuple(stims))


def _design_lowpass(cutoff_hz: float, fs: float) -> np.ndarray:
    """Windowed-sinc lowpass taps (Hamming), unit DC gain, odd length.

    The transition band is fixed at 25% of the cutoff, which sets the tap
    count via the usual Hamming width rule.
    """
    width = 0.25 * cutoff_hz
    numtaps = int(math.ceil(3.3 * fs / width))
    if numtaps % 2 == 0:
        numtaps += 1
    mid = (numtaps - 1) / 2.0
    t = np.arange(numtaps) - mid
    fc = cutoff_hz / fs
    h = 2.0 * fc * np.sinc(2.0 * fc * t)
    h *= np.hamming(numtaps)
    return h / h.sum()


def _zero_phase_apply(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # Forward-backward convolution with odd reflection padding at both
    # ends; symmetric taps keep each pass zero-phase, the double pass
    # squares the magnitude response.
    p = min(len(x) - 1, len(taps))
    left = 2.0 * x[0] - x[p:0:-1]
    right = 2.0 * x[-1] - x[-2:-p - 2:-1]
    xp = np.concatenate([left, x, right])
    y = np.convolve(xp, taps, mode="same")
    y = np.convolve(y[::-1], taps, mode="same")[::-1]
    return y[p:p + len(x)]


def fir_filter(x: TimeSeries, kind: str, cutoff_hz: float) -> TimeSeries:
    """Zero-phase FIR filtering (windowed-sinc, Hamming window).

    Parameters
    ----------
    x : TimeSeries
        Input record; must be longer than the filter order.
    kind : {"lowpass", "highpass"}
        Highpass taps come from spectral inversion of the lowpass design,
        so the DC gain of a highpass is exactly zero.
    cutoff_hz : float
        Cutoff frequency, strictly inside (0, fs/2).

    Returns
    -------
    TimeSeries
        Filtered record, same length and rate as the input.  Filtering is
        applied forward and backward, so the net phase is zero.
    """
    if kind not in ("lowpass", "highpass"):
        raise InvalidArgument(f"kind must be 'lowpass' or 'highpass', got {kind!r}")
    cutoff = float(cutoff_hz)
    if not (0.0 < cutoff < x.fs / 2):
        raise InvalidArgument(
            f"cutoff {cutoff_hz} Hz outside (0, {x.fs / 2}) for fs={x.fs}")
    taps = _design_lowpass(cutoff, x.fs)
    if len(x) <= len(taps) - 1:
        raise SignalTooShort(
            f"need more than {len(taps) - 1} samples for cutoff "
            f"{cutoff_hz} Hz at fs={x.fs}, got {len(x)}")
    if kind == "highpass":
        hp = -taps
        hp[(len(taps) - 1) // 2] += 1.0
        taps = hp
    return TimeSeries(_zero_phase_apply(x.samples, taps), fs=x.fs, label=x.label)


def decimate(x: TimeSeries, factor: int) -> TimeSeries:
    """Integer-factor downsampling with an anti-alias lowpass.

    A factor of 1 returns the input unchanged.  Otherwise the record is
    lowpass filtered at ``0.4 * (fs / factor)`` (zero phase) and every
    ``factor``-th sample is kept, so the output length is
    ``len(x) // factor`` and the output rate ``fs / factor``.
    """
    if not (isinstance(factor, (int, np.integer)) and factor >= 1):
        raise InvalidArgument(f"factor must be an integer >= 1, got {factor!r}")
    factor = int(factor)
    if factor == 1:
        return x
    cutoff = 0.4 * (x.fs / factor)
    filtered = fir_filter(x, "lowpass", cutoff)
    n_out = len(x) // factor
    if n_out == 0:
        raise SignalTooShort(f"{len(x)} samples cannot be decimated by {factor}")
    y = filtered.samples[:n_out * factor:factor]
    return TimeSeries(y, fs=x.fs / factor, label=x.label)


def zscore(x: TimeSeries) -> TimeSeries:
    """Center to zero mean and scale to unit population SD (divisor n)."""
    arr = x.samples
    sd = arr.std()
    if sd == 0.0:
        raise DegenerateSignal("constant signal has no scale to normalize by")
    return TimeSeries((arr - arr.mean()) / sd, fs=x.fs, label=x.label)


def reject_artifacts(x: TimeSeries, threshold: float) -> tuple[TimeSeries, float]:
    """Drop samples around amplitude excursions beyond ``threshold``.

    Every sample with ``|value| > threshold`` is marked bad together with
    0.5 s of padding on each side; the surviving segments are concatenated.

    Returns
    -------
    (TimeSeries, float)
        The cleaned record and the fraction of samples removed (0.0 when
        nothing exceeded the threshold).
    """
    thr = float(threshold)
    if not (math.isfinite(thr) and thr > 0):
        raise InvalidArgument(f"threshold must be positive, got {threshold!r}")
    arr = x.samples
    bad = np.abs(arr) > thr
    if not bad.any():
        return x, 0.0
    pad = int(round(0.5 * x.fs))
    mask = np.zeros(len(arr), dtype=bool)
    for idx in np.flatnonzero(bad):
        mask[max(0, idx - pad):idx + pad + 1] = True
    kept = arr[~mask]
    fraction = float(mask.sum()) / len(arr)
    if kept.size == 0:
        raise SignalTooShort(
            f"artifact rejection at threshold {threshold} removed every sample")
    return TimeSeries(kept, fs=x.fs, label=x.label), fraction
