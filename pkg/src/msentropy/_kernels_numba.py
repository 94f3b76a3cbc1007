"""JIT-compiled entropy kernels (the hot O(N^2) pair loops).

Signatures and semantics mirror ``_kernels_numpy`` exactly; the backend
facade picks one of the two at import time.  Inputs are contiguous
float64 arrays that the callers have already validated, so the loops here
do no checking.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def fuzzy_phis(x, m, r, n):
    # Combined membership sums for window lengths m and m+1 over the same
    # N-m start positions; windows are compared after removing their own
    # mean, distance is Chebyshev.  Returns (phi_m, phi_m1).
    N = x.shape[0]
    K = N - m
    mu_m = np.empty(K)
    mu_m1 = np.empty(K)
    for i in range(K):
        s = 0.0
        for k in range(m):
            s += x[i + k]
        mu_m[i] = s / m
        mu_m1[i] = (s + x[i + m]) / (m + 1)
    row_m = np.zeros(K)
    row_m1 = np.zeros(K)
    for i in range(K):
        for j in range(i + 1, K):
            a = mu_m[i] - mu_m[j]
            d = 0.0
            for k in range(m):
                diff = x[i + k] - x[j + k] - a
                if diff < 0.0:
                    diff = -diff
                if diff > d:
                    d = diff
            b = mu_m1[i] - mu_m1[j]
            d1 = 0.0
            for k in range(m + 1):
                diff = x[i + k] - x[j + k] - b
                if diff < 0.0:
                    diff = -diff
                if diff > d1:
                    d1 = diff
            if n == 2.0:
                dm = np.exp(-(d * d) / r)
                dm1 = np.exp(-(d1 * d1) / r)
            else:
                dm = np.exp(-(d ** n) / r)
                dm1 = np.exp(-(d1 ** n) / r)
            row_m[i] += dm
            row_m[j] += dm
            row_m1[i] += dm1
            row_m1[j] += dm1
    tot_m = 0.0
    tot_m1 = 0.0
    for i in range(K):
        tot_m += row_m[i]
        tot_m1 += row_m1[i]
    denom = K * (K - 1.0)
    return tot_m / denom, tot_m1 / denom


@njit(cache=True)
def sample_counts(x, m, r):
    # Unordered template-pair match counts at lengths m (B) and m+1 (A),
    # both over the N-m start positions, plain Chebyshev distance <= r.
    N = x.shape[0]
    K = N - m
    A = 0
    B = 0
    for i in range(K):
        for j in range(i + 1, K):
            ok = True
            for k in range(m):
                diff = x[i + k] - x[j + k]
                if diff < 0.0:
                    diff = -diff
                if diff > r:
                    ok = False
                    break
            if ok:
                B += 1
                diff = x[i + m] - x[j + m]
                if diff < 0.0:
                    diff = -diff
                if diff <= r:
                    A += 1
    return A, B


@njit(cache=True)
def approx_phi(x, mm, r):
    # Mean log match frequency with self-matches included, all N-mm+1
    # windows of length mm.
    N = x.shape[0]
    M = N - mm + 1
    total = 0.0
    for i in range(M):
        c = 0
        for j in range(M):
            d = 0.0
            for k in range(mm):
                diff = x[i + k] - x[j + k]
                if diff < 0.0:
                    diff = -diff
                if diff > d:
                    d = diff
                    if d > r:
                        break
            if d <= r:
                c += 1
        total += np.log(c / M)
    return total / M
