"""Naive reference implementations used only by the test suite.

Everything here is a direct, unoptimized transcription of the defining
formulas: plain Python loops over lists, no vectorization, no shared code
with the production kernels.  Production code is compared against these
at tight tolerances; keep them slow and obvious.
"""
from __future__ import annotations

import math


def standardize(x):
    """Center and scale to unit population SD (divisor n)."""
    n = len(x)
    mu = sum(x) / n
    var = sum((v - mu) ** 2 for v in x) / n
    sd = math.sqrt(var)
    return [(v - mu) / sd for v in x]


def chebyshev(a, b):
    return max(abs(u - v) for u, v in zip(a, b))


def fuzzy_entropy_oracle(x, m, r, n):
    """Fuzzy entropy of a pre-standardized sequence.

    Windows of length m and m+1 have their own mean removed; membership of
    a pair is exp(-d**n / r) with d the Chebyshev distance between the
    mean-removed windows.  Both template families run over the same
    N - m start positions, self-pairs excluded.
    """
    N = len(x)
    K = N - m

    def phi(mm):
        windows = []
        for i in range(K):
            w = x[i:i + mm]
            mu = sum(w) / mm
            windows.append([v - mu for v in w])
        outer = 0.0
        for i in range(K):
            inner = 0.0
            for j in range(K):
                if j == i:
                    continue
                d = chebyshev(windows[i], windows[j])
                inner += math.exp(-(d ** n) / r)
            outer += inner / (K - 1)
        return outer / K

    return math.log(phi(m)) - math.log(phi(m + 1))


def sample_entropy_oracle(x, m, r):
    """Sample entropy; returns NaN when no matches exist at either length."""
    N = len(x)
    K = N - m
    B = 0
    A = 0
    for i in range(K):
        for j in range(i + 1, K):
            if chebyshev(x[i:i + m], x[j:j + m]) <= r:
                B += 1
            if chebyshev(x[i:i + m + 1], x[j:j + m + 1]) <= r:
                A += 1
    if A == 0 or B == 0:
        return math.nan
    return -math.log(A / B)


def approximate_entropy_oracle(x, m, r):
    """Approximate entropy with self-matches included."""
    N = len(x)

    def phi(mm):
        M = N - mm + 1
        total = 0.0
        for i in range(M):
            c = 0
            for j in range(M):
                if chebyshev(x[i:i + mm], x[j:j + mm]) <= r:
                    c += 1
            total += math.log(c / M)
        return total / M

    return phi(m) - phi(m + 1)


def norm_cdf(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def dispersion_entropy_oracle(x, m, c, delay):
    """Normalized dispersion entropy of a raw sequence.

    Maps standardized samples through the normal CDF onto classes 1..c,
    counts embedding patterns, and normalizes Shannon entropy by ln(c**m).
    """
    z = standardize(x)
    classes = []
    for v in z:
        k = round(c * norm_cdf(v) + 0.5)
        classes.append(min(c, max(1, k)))
    n_pat = len(x) - (m - 1) * delay
    counts = {}
    for i in range(n_pat):
        pat = tuple(classes[i + k * delay] for k in range(m))
        counts[pat] = counts.get(pat, 0) + 1
    h = 0.0
    for cnt in counts.values():
        p = cnt / n_pat
        h -= p * math.log(p)
    return h / math.log(float(c) ** m)


def coarse_grain_oracle(x, tau):
    """Non-overlapping window means, literal left-to-right accumulation."""
    n_out = len(x) // tau
    out = []
    for j in range(n_out):
        s = 0.0
        for k in range(tau):
            s += x[j * tau + k]
        out.append(s / tau)
    return out


def zero_crossings(x):
    """Count strict sign changes, ignoring zero samples."""
    signs = [v for v in x if v != 0.0]
    count = 0
    for a, b in zip(signs, signs[1:]):
        if (a > 0) != (b > 0):
            count += 1
    return count


def natural_cubic_eval(xs, ys, t):
    """Evaluate the natural cubic spline through (xs, ys) at points t.

    Classic tridiagonal solve for second derivatives with zero curvature
    at both ends; evaluation walks intervals linearly.
    """
    n = len(xs)
    if n == 2:
        # degenerates to the chord
        return [ys[0] + (ys[1] - ys[0]) * (p - xs[0]) / (xs[1] - xs[0])
                for p in t]
    h = [xs[i + 1] - xs[i] for i in range(n - 1)]
    # build and solve the tridiagonal system for curvatures m[1..n-2]
    sub = [0.0] * n
    diag = [1.0] * n
    sup = [0.0] * n
    rhs = [0.0] * n
    for i in range(1, n - 1):
        sub[i] = h[i - 1]
        diag[i] = 2.0 * (h[i - 1] + h[i])
        sup[i] = h[i]
        rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1])
    # forward elimination
    for i in range(1, n):
        w = sub[i] / diag[i - 1]
        diag[i] -= w * sup[i - 1]
        rhs[i] -= w * rhs[i - 1]
    m = [0.0] * n
    m[n - 1] = rhs[n - 1] / diag[n - 1]
    for i in range(n - 2, -1, -1):
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i]
    out = []
    for p in t:
        # locate interval (clamped extrapolation uses the edge cubic)
        lo = 0
        while lo < n - 2 and p > xs[lo + 1]:
            lo += 1
        d = p - xs[lo]
        hh = h[lo]
        a = (m[lo + 1] - m[lo]) / (6.0 * hh)
        b = m[lo] / 2.0
        cc = (ys[lo + 1] - ys[lo]) / hh - hh * (2.0 * m[lo] + m[lo + 1]) / 6.0
        out.append(ys[lo] + d * (cc + d * (b + d * a)))
    return out


def periodogram_slope(x, fs, f_lo, f_hi):
    """Log-log slope of the raw periodogram between f_lo and f_hi (Hz)."""
    import numpy as np

    n = len(x)
    spec = np.abs(np.fft.rfft(np.asarray(x, dtype=float))) ** 2 / n
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    keep = (freqs >= f_lo) & (freqs <= f_hi) & (spec > 0)
    lx = np.log10(freqs[keep])
    ly = np.log10(spec[keep])
    slope = np.polyfit(lx, ly, 1)[0]
    return float(slope)


def spearman_rho(x, y):
    """Spearman rank correlation; ties get midranks."""
    def ranks(v):
        order = sorted(range(len(v)), key=lambda i: v[i])
        r = [0.0] * len(v)
        i = 0
        while i < len(v):
            j = i
            while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
                j += 1
            avg = (i + j) / 2.0 + 1.0
            for k in range(i, j + 1):
                r[order[k]] = avg
            i = j + 1
        return r

    rx = ranks(list(x))
    ry = ranks(list(y))
    n = len(rx)
    mx = sum(rx) / n
    my = sum(ry) / n
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    den = math.sqrt(sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry))
    return num / den
