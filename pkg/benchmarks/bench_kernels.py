"""Compare the JIT and vectorized-numpy entropy kernels.

Times the three O(N^2) kernels on white noise at several record lengths
and the full 20-scale flagship profile on one N=2500 epoch.  Both
backends are imported directly, so the run ignores MSENTROPY_BACKEND.

Usage: python3 benchmarks/bench_kernels.py [--repeats 5]
"""
import argparse
import importlib
import time

import numpy as np


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def backend_modules():
    mods = {"numpy": importlib.import_module("msentropy._kernels_numpy")}
    try:
        mods["numba"] = importlib.import_module("msentropy._kernels_numba")
    except ImportError:
        pass
    return mods


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    mods = backend_modules()
    if "numba" not in mods:
        print("numba backend unavailable; timing numpy only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'N':>7}" + "".join(f"{n:>12}" for n in mods))
    for n_samples in (500, 1000, 2500):
        x = rng.standard_normal(n_samples)
        calls = {
            "fuzzy_phis": lambda m: m.fuzzy_phis(x, 2, 0.15, 2.0),
            "sample_counts": lambda m: m.sample_counts(x, 2, 0.15),
            "approx_phi": lambda m: m.approx_phi(x, 2, 0.15),
        }
        for name, call in calls.items():
            row = f"{name:<14}{n_samples:>7}"
            for mod in mods.values():
                call(mod)  # warm JIT compile outside the timed region
                dt = best_of(lambda: call(mod), args.repeats)
                row += f"{dt * 1e3:>10.2f}ms"
            print(row)

    from msentropy.pipeline import PipelineConfig, inherent_fuzzy_entropy
    from msentropy.signals import TimeSeries
    from msentropy import _backend

    epoch = TimeSeries(rng.standard_normal(2500), 250.0)
    cfg = PipelineConfig()
    inherent_fuzzy_entropy(epoch, cfg)  # warm
    dt = best_of(lambda: inherent_fuzzy_entropy(epoch, cfg), args.repeats)
    print(f"\nflagship 20-scale profile, N=2500, backend "
          f"{_backend.active_backend()}: {dt:.3f}s")


if __name__ == "__main__":
    main()
