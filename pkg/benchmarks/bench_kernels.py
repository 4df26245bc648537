#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Covers the three hot paths behind the package's runtime bounds: CRC-16
over frame-sized buffers, COBS round trips, and batched plant stepping
(equilibrium re-solve per step).
"""

import argparse
import time
from random import Random

import pneumyo._kernels._py as py_kernels

try:
    import pneumyo._kernels._ext as ext_kernels
except ImportError:
    ext_kernels = None


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_cases():
    rng = Random(2)
    frames = [bytes(rng.randrange(1, 256) for _ in range(24)) for _ in range(2000)]
    mixed = [bytes(rng.randrange(256) for _ in range(rng.randrange(4, 70)))
             for _ in range(2000)]
    plant_args = dict(dt=1e-3, v0=5e-5, c=4.0, p_atm=101.325, rt=8.314 * 293.15,
                      n_min=101.325 * 5e-5 / (8.314 * 293.15), p_stall=30.0,
                      g_pump=2e-7, g_vent=4e-7, g_leak0=1e-9, tau_decay=3600.0,
                      rel_tol=1e-10, max_iter=200)

    def crc_case(mod):
        def run():
            total = 0
            for frame in frames:
                total ^= mod.crc16_ccitt(frame)
            return total
        return run

    def cobs_case(mod):
        def run():
            for data in mixed:
                mod.cobs_decode(mod.cobs_encode(data))
        return run

    def plant_case(mod):
        def run():
            n = plant_args["n_min"]
            state = (n, 1.0, 0.0)
            state = mod.run_steps(*state, 1, 10_000, **plant_args)[:3]
            state = mod.run_steps(*state, 0, 10_000, **plant_args)[:3]
            mod.run_steps(*state, 2, 10_000, **plant_args)
        return run

    return [
        ("crc16 (2000 x 24 B)", crc_case),
        ("cobs round trip (2000 bufs)", cobs_case),
        ("plant run_steps (30k steps)", plant_case),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5, help="best-of repeats")
    args = parser.parse_args()

    print(f"{'kernel':<30} {'python':>12} {'ext':>12} {'speedup':>9}")
    for name, case in make_cases():
        t_py = bench(case(py_kernels), args.repeat)
        if ext_kernels is not None:
            t_ext = bench(case(ext_kernels), args.repeat)
            print(f"{name:<30} {t_py * 1e3:>10.2f}ms {t_ext * 1e3:>10.2f}ms "
                  f"{t_py / t_ext:>8.1f}x")
        else:
            print(f"{name:<30} {t_py * 1e3:>10.2f}ms {'n/a':>12} {'':>9}")
    if ext_kernels is None:
        print("\ncompiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
