#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

The two hot inner loops live in the extension: the associated Legendre
recurrence behind every spherical-harmonic transform, and the RK4 focusing
integrator. The fallback produces identical results (tested), just slower;
this script quantifies by how much on the current machine, plus the impact
on a user-level operation (a Laplacian round trip).

Run:  python benchmarks/bench_backends.py
"""

import time

import numpy as np

from lightcone import _kernels_py
from lightcone import build_grid, laplacian, FULL_SPHERE
from lightcone.backend import BACKEND, kernels


def timeit(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_legendre(mod, n, lmax):
    x = np.linspace(-0.999, 0.999, n)
    return timeit(lambda: mod.assoc_legendre_block(0, lmax, x))


def bench_rk4(mod, steps):
    src = np.abs(np.sin(0.001 * np.arange(2 * steps + 1)))
    return timeit(lambda: mod.rk4_riccati(2.0, src, 1e-6, steps))


def bench_laplacian(n_theta, n_phi):
    grid = build_grid(FULL_SPHERE, n_theta, n_phi)
    f = grid.field_from_function(lambda th, ph: np.sin(th) ** 2 * np.cos(2 * ph))
    laplacian(f)                      # build tables outside the timing
    fresh = build_grid(FULL_SPHERE, n_theta, n_phi)
    g = fresh.field(f.values)
    return timeit(lambda: laplacian(g), repeats=1)


def main():
    if kernels is _kernels_py:
        print("fallback backend active (extension missing or "
              "LIGHTCONE_PURE_PYTHON set)")
        t = bench_laplacian(128, 256)
        print(f"user-level: laplacian on a fresh 128x256 grid: {t * 1e3:.1f} ms "
              "with python kernels")
        return
    print(f"active backend: {BACKEND}")
    print()
    rows = []
    for n, lmax in [(256, 255), (512, 511), (1024, 1023)]:
        tc = bench_legendre(kernels, n, lmax)
        tp = bench_legendre(_kernels_py, n, lmax)
        rows.append((f"legendre block n={n} lmax={lmax}", tc, tp))
    for steps in (100_000, 1_000_000):
        tc = bench_rk4(kernels, steps)
        tp = bench_rk4(_kernels_py, steps)
        rows.append((f"rk4 riccati steps={steps}", tc, tp))
    print(f"{'kernel':38s} {'cython':>10s} {'python':>10s} {'speedup':>8s}")
    for name, tc, tp in rows:
        print(f"{name:38s} {tc * 1e3:9.2f}ms {tp * 1e3:9.2f}ms {tp / tc:7.1f}x")
    print()
    t = bench_laplacian(128, 256)
    print(f"user-level: laplacian on a fresh 128x256 grid "
          f"(includes table build): {t * 1e3:.1f} ms with {BACKEND} kernels")
    print("(set LIGHTCONE_PURE_PYTHON=1 and rerun for the fallback figure)")


if __name__ == "__main__":
    main()
