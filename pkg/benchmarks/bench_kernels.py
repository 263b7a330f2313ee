#!/usr/bin/env python3
"""Time the numba and pure-numpy kernels on the paper's 4x4 setup.

Usage:
    python benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qwipe import _kernels
from qwipe.analytic import ModelParams
from qwipe.channel import DissipationParams, replacement_weight
from qwipe.experiments import paper_setup
from qwipe.linalg import hermitian_propagator


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = ModelParams(0.5, 0.5, 1e3, DissipationParams(0.5, 1e-3), 0.25)
    dt = 1e-6
    state, h, sigma = paper_setup(params)
    rho = np.ascontiguousarray(state.rho12.matrix)
    u = hermitian_propagator(h, dt)
    w = replacement_weight(params.dissipation, dt)
    rec = np.arange(0, args.steps + 1, 100, dtype=np.int64)
    half = 0.5 * params.c * dt
    rec_args = (0.3125, 0.1875, np.exp(-1j * half), np.exp(1j * half), w, 0.625, 0.375, args.steps)

    kernels = {"numpy": (_kernels.evolve_numpy, _kernels.recurrence_numpy)}
    if _kernels.HAVE_NUMBA:
        kernels["numba"] = (_kernels.evolve_numba, _kernels.recurrence_numba)

    results = {}
    for name, (evolve, recurrence) in kernels.items():
        out = np.empty((len(rec), 4, 4), dtype=np.complex128)
        evolve(rho, u, sigma, w, 2, 2, 10, rec[:1], out)  # compile / warm up
        recurrence(*rec_args[:-1], 10)
        t_evo = best_of(lambda: evolve(rho, u, sigma, w, 2, 2, args.steps, rec, out), args.repeat)
        t_rec = best_of(lambda: recurrence(*rec_args), args.repeat)
        results[name] = (t_evo, t_rec, out.copy())
        print(f"{name:>6}: evolve {t_evo * 1e3:9.2f} ms ({t_evo / args.steps * 1e9:7.1f} ns/step)"
              f"   recurrence {t_rec * 1e3:8.2f} ms")

    if "numba" in results:
        te_np, tr_np, out_np = results["numpy"]
        te_nb, tr_nb, out_nb = results["numba"]
        print(f"speedup: evolve x{te_np / te_nb:.1f}, recurrence x{tr_np / tr_nb:.1f}; "
              f"max |difference| {np.max(np.abs(out_np - out_nb)):.2e}")


if __name__ == "__main__":
    main()
