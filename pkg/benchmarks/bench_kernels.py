"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from wptsim import _kernels

LOAD_V = np.array([0.0, 0.5, 1.0, 1.55, 1.7499])
LOAD_P = np.array([0.0, 1e-6, 3e-6, 6e-6, 8e-6])


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    # one second of an 84-tone envelope at 100 kHz
    t = np.arange(100_000) / 100e3
    coeffs = rng.normal(size=84) + 1j * rng.normal(size=84)
    freqs = np.arange(84) * 100.0
    # a 30-minute trace at 250 Hz
    n = 450_000
    p = np.repeat(rng.uniform(0, 40e-6, n // 1250), 1250)
    v = np.repeat(rng.uniform(0, 2.0, n // 1250), 1250)
    rec = (p, v, 0, n, 4e-3, 100e-6, 1.75, 1.55, 380e-6, LOAD_V, LOAD_P, 20, 0.0, False)

    if _kernels.numba is None:
        print("numba is not installed; only the fallback can run")
        return
    _kernels.envelope_power_numba(t[:10], coeffs, freqs)
    _kernels.buffer_recurrence_numba(*rec)

    rows = [
        ("envelope 84 tones x 1e5 samples",
         best_of(lambda: _kernels.envelope_power_numpy(t, coeffs, freqs), args.repeat),
         best_of(lambda: _kernels.envelope_power_numba(t, coeffs, freqs), args.repeat)),
        ("buffer recurrence 4.5e5 steps",
         best_of(lambda: _kernels.buffer_recurrence_numpy(*rec), max(1, args.repeat // 5)),
         best_of(lambda: _kernels.buffer_recurrence_numba(*rec), args.repeat)),
    ]
    print(f"{'kernel':<34} {'numpy [s]':>10} {'numba [s]':>10} {'speed-up':>9}")
    for name, a, b in rows:
        print(f"{name:<34} {a:>10.4f} {b:>10.4f} {a / b:>8.1f}x")


if __name__ == "__main__":
    main()
