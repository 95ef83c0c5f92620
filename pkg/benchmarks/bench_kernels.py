"""Benchmark the compiled kernel backend against the pure-numpy twin.

Run with:  python3 benchmarks/bench_kernels.py
"""
import time

import numpy as np

from gtoda._core import kernels_py

try:
    from gtoda._core import kernels as compiled
except ImportError:
    compiled = None


def timeit(fn, *args, repeat=5, number=20):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def main():
    rng = np.random.default_rng(0)
    rows = []
    for n, B in ((2, 10000), (4, 10000), (8, 5000)):
        T = n * (n + 1) // 2
        x = np.ascontiguousarray(0.3 * rng.standard_normal((B, T)))
        lam = rng.uniform(-1, 1, n)
        dB = np.ascontiguousarray(0.01 * rng.standard_normal((B, n)))
        dW = np.ascontiguousarray(0.01 * rng.standard_normal((B, T)))
        cases = [
            (f"tri_field_rsk       n={n} B={B}", "tri_field_rsk", (x, lam)),
            (f"tri_field_local     n={n} B={B}", "tri_field_local", (x, lam)),
            (f"em_increment_rsk    n={n} B={B}", "em_increment_rsk",
             (x, lam, 1e-3, dB)),
            (f"em_increment_warren n={n} B={B}", "em_increment_warren",
             (x, lam, 1e-3, dW)),
        ]
        for label, name, args in cases:
            rows.append((label, name, args))
    g = np.ascontiguousarray(rng.standard_normal((200, 2001)))
    dt = np.ascontiguousarray(np.full(2000, 1e-3))
    rows.append(("log_trap_cumint     (200, 2001)", "log_trap_cumint", (g, dt)))

    print(f"{'kernel':40s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for label, name, args in rows:
        tp = timeit(getattr(kernels_py, name), *args)
        if compiled is None:
            print(f"{label:40s} {tp*1e3:9.3f}ms {'n/a':>10s} {'n/a':>8s}")
            continue
        tc = timeit(getattr(compiled, name), *args)
        print(f"{label:40s} {tp*1e3:9.3f}ms {tc*1e3:9.3f}ms {tp/tc:7.1f}x")


if __name__ == "__main__":
    main()
