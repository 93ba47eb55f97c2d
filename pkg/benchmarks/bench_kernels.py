"""Benchmark the compiled kernels against the pure-NumPy fallback.

Run:  python benchmarks/bench_kernels.py [--sizes 65536,262144] [--repeats 50]

Times the per-call cost of each inner-loop kernel on both backends, plus one
full Strang step per grid, and prints a speedup table.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nlslab import _kernels_py
from nlslab import kernels as dispatched
from nlslab.dynamics import StepperConfig, strang_step
from nlslab.datagen import RoughRandom, generate
from nlslab.grid import make_grid

try:
    from nlslab import _corekernels

    BACKENDS = {"cython": _corekernels, "numpy": _kernels_py}
except ImportError:
    BACKENDS = {"numpy": _kernels_py}


def time_call(fn, *args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, repeats):
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    w = np.exp(1j * rng.standard_normal(n))
    wr = np.abs(rng.standard_normal(n))
    keep = (rng.random(n) > 0.3).astype(np.uint8)

    cases = {
        "nonlinear_phase": lambda mod: mod.nonlinear_phase(v.copy(), 1e-3, 1.0),
        "multiply_inplace": lambda mod: mod.multiply_inplace(v.copy(), w),
        "multiply_real": lambda mod: mod.multiply_real_inplace(v.copy(), wr),
        "abs2_sum": lambda mod: mod.abs2_sum(v),
        "abs4_sum": lambda mod: mod.abs4_sum(v),
        "weighted_abs2_sum": lambda mod: mod.weighted_abs2_sum(v, wr),
        "apply_mask_collect": lambda mod: mod.apply_mask_collect(v.copy(), keep),
    }
    print(f"\n== pointwise kernels, n = {n} (best of {repeats}) ==")
    header = f"{'kernel':22s}" + "".join(f"{name:>12s}" for name in BACKENDS)
    if len(BACKENDS) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label, call in cases.items():
        times = [time_call(call, mod, repeats=repeats) for mod in BACKENDS.values()]
        row = f"{label:22s}" + "".join(f"{t * 1e6:10.1f}us" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:9.2f}x"
        print(row)


def bench_step(m, repeats):
    grid = make_grid(2, m, 2 * np.pi)
    field = generate(grid, RoughRandom(0.7, 1.0, 1))
    cfg = StepperConfig(dt=1e-4)

    print(f"\n== full Strang step, {m}x{m} grid (best of {repeats}) ==")
    for name in BACKENDS:
        import nlslab.kernels as K

        saved = {
            attr: getattr(K, attr)
            for attr in (
                "nonlinear_phase",
                "multiply_inplace",
                "multiply_real_inplace",
                "abs2_sum",
                "abs4_sum",
                "weighted_abs2_sum",
                "apply_mask_collect",
            )
        }
        mod = BACKENDS[name]
        for attr in saved:
            setattr(K, attr, getattr(mod, attr))
        try:
            t = time_call(lambda: strang_step(field, 1e-4, cfg), repeats=repeats)
            print(f"{name:22s}{t * 1e3:10.2f} ms/step")
        finally:
            for attr, fn in saved.items():
                setattr(K, attr, fn)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="65536,262144")
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    print(f"dispatched backend: {dispatched.backend_name()}")
    print(f"available backends: {', '.join(BACKENDS)}")
    for n in (int(s) for s in args.sizes.split(",")):
        bench_kernels(n, args.repeats)
    for m in (128, 256):
        bench_step(m, max(args.repeats // 5, 5))


if __name__ == "__main__":
    main()
