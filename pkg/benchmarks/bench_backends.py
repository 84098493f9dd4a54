#!/usr/bin/env python3
"""Benchmark the compiled Monte-Carlo kernel against the NumPy fallback,
plus the symmetric versus general closed-form SER paths.

Run:  python benchmarks/bench_backends.py [--trials 2000000] [--n 4]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from relaysel.backend import available_backends
from relaysel.model import BPSK, NetworkConfig
from relaysel.montecarlo import RngStream, _draw_chunk
from relaysel import analytic


def time_kernel(kernel, hsq, hhsq, cfg, n_sel, repeats=3):
    out_sum = np.zeros(2)
    out_sumsq = np.zeros(2)
    out_err = np.zeros(2, dtype=np.int64)
    znoise = np.empty((2, 0))
    best = float("inf")
    for _ in range(repeats):
        out_sum[:] = 0
        out_sumsq[:] = 0
        t0 = time.perf_counter()
        kernel.accumulate_ser(hsq, hhsq, cfg.psi_s, cfg.psi_r, n_sel, 0,
                              BPSK.alpha, BPSK.beta, 0, znoise,
                              out_sum, out_sumsq, out_err)
        best = min(best, time.perf_counter() - t0)
    return best, out_sum[0] / hsq.shape[2]


def bench_kernels(trials: int, n_relays: int):
    cfg = NetworkConfig.create(n_relays, sigma2=1.0, fd_td=0.1, psi_s=100.0, psi_r=100.0)
    gen = RngStream(1234).generator()
    t0 = time.perf_counter()
    hsq, hhsq = _draw_chunk(cfg, gen, trials)
    t_sample = time.perf_counter() - t0
    print(f"channel sampling ({trials:.0e} trials, N={n_relays}): {t_sample*1e3:8.1f} ms")

    results = {}
    for n_sel in (1, min(2, n_relays)):
        print(f"\nselection size K={n_sel}:")
        for name, kernel in sorted(available_backends().items()):
            dt, ser = time_kernel(kernel, hsq, hhsq, cfg, n_sel)
            results[(name, n_sel)] = dt
            rate = trials / dt / 1e6
            print(f"  {name:9s} {dt*1e3:8.1f} ms  ({rate:6.1f} M trials/s)  ser={ser:.6e}")
        if ("compiled", n_sel) in results:
            speedup = results[("python", n_sel)] / results[("compiled", n_sel)]
            print(f"  compiled speedup over python: x{speedup:.2f}")


def bench_analytic(n_relays: int):
    print(f"\nclosed-form SER, symmetric vs general path (N={n_relays}):")
    cfg = NetworkConfig.create(n_relays, sigma2=1.0, fd_td=0.1, psi_s=100.0, psi_r=100.0)
    for path in ("symmetric", "general"):
        t0 = time.perf_counter()
        val = analytic.average_ser(cfg, BPSK, 0, path=path)
        dt = time.perf_counter() - t0
        print(f"  {path:9s} {dt*1e3:8.1f} ms  ser={val:.12e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=2_000_000)
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--n-analytic", type=int, default=10)
    args = parser.parse_args()
    bench_kernels(args.trials, args.n)
    bench_analytic(args.n_analytic)


if __name__ == "__main__":
    main()
