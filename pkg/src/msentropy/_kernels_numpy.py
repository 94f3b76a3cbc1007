"""Vectorized numpy fallback for the entropy kernels.

Same contracts as ``_kernels_numba``, for environments where the JIT
backend is unavailable or explicitly disabled.  Pairwise distances are
computed in row blocks to bound transient memory at ~tens of MB even for
long records.
"""
from __future__ import annotations

import numpy as np

_BLOCK = 128


def fuzzy_phis(x, m, r, n):
    N = x.shape[0]
    K = N - m
    idx = np.arange(K)
    win_m = x[idx[:, None] + np.arange(m)[None, :]]
    win_m = win_m - win_m.mean(axis=1, keepdims=True)
    win_m1 = x[idx[:, None] + np.arange(m + 1)[None, :]]
    win_m1 = win_m1 - win_m1.mean(axis=1, keepdims=True)
    tot_m = 0.0
    tot_m1 = 0.0
    for i0 in range(0, K, _BLOCK):
        i1 = min(i0 + _BLOCK, K)
        d = np.abs(win_m[i0:i1, None, :] - win_m[None, :, :]).max(axis=2)
        if n == 2.0:
            sim = np.exp(-(d * d) / r)
        else:
            sim = np.exp(-(d ** n) / r)
        # zero the self-pairs instead of subtracting them afterwards
        rows = np.arange(i1 - i0)
        sim[rows, i0 + rows] = 0.0
        tot_m += float(sim.sum())
        d = np.abs(win_m1[i0:i1, None, :] - win_m1[None, :, :]).max(axis=2)
        if n == 2.0:
            sim = np.exp(-(d * d) / r)
        else:
            sim = np.exp(-(d ** n) / r)
        sim[rows, i0 + rows] = 0.0
        tot_m1 += float(sim.sum())
    denom = K * (K - 1.0)
    return tot_m / denom, tot_m1 / denom


def sample_counts(x, m, r):
    N = x.shape[0]
    K = N - m
    idx = np.arange(K)
    win_m = x[idx[:, None] + np.arange(m)[None, :]]
    tail = x[idx + m]
    A = 0
    B = 0
    for i0 in range(0, K, _BLOCK):
        i1 = min(i0 + _BLOCK, K)
        d = np.abs(win_m[i0:i1, None, :] - win_m[None, :, :]).max(axis=2)
        match_m = d <= r
        rows = np.arange(i1 - i0)
        match_m[rows, i0 + rows] = False
        B += int(match_m.sum())
        match_m1 = match_m & (np.abs(tail[i0:i1, None] - tail[None, :]) <= r)
        A += int(match_m1.sum())
    # ordered pairs were counted; halve to unordered
    return A // 2, B // 2


def approx_phi(x, mm, r):
    N = x.shape[0]
    M = N - mm + 1
    idx = np.arange(M)
    win = x[idx[:, None] + np.arange(mm)[None, :]]
    logs = np.empty(M)
    for i0 in range(0, M, _BLOCK):
        i1 = min(i0 + _BLOCK, M)
        d = np.abs(win[i0:i1, None, :] - win[None, :, :]).max(axis=2)
        counts = (d <= r).sum(axis=1)
        logs[i0:i1] = np.log(counts / M)
    return float(logs.mean())
