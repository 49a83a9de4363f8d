"""Compare the numba and numpy paths of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Both paths are imported from the same module, so the numba build must be
available; the numpy path is what LCTJITTER_DISABLE_NUMBA=1 selects.
"""

import argparse
import time

import numpy as np

from lctjitter import _kernels as K


def best_of(fn, repeat):
    fn()  # warm-up (JIT compile / cache load)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    # Monte Carlo trial shape: 801 outputs, 64-tap margin, jittered centers
    c = np.arange(-105, 106) * 0.1 + rng.uniform(-0.01, 0.01, 211)
    w = np.exp(1j * rng.uniform(0, 2 * np.pi, c.size))
    t = np.linspace(-4, 4, 801)
    yield "sinc_sum  801 x 211 (64 taps)", K.sinc_sum_numpy, K.sinc_sum_numba, (t, c, w, 0.1, 6.4)
    # zero-jitter exactness shape, scaled down to 2^16 taps
    c = np.arange(-(1 << 16) - 41, (1 << 16) + 42) * 0.1
    w = np.exp(1j * 5 * np.pi * c)
    t = np.linspace(-4, 4, 201)
    yield "sinc_sum  201 x 131k (2^16 taps)", K.sinc_sum_numpy, K.sinc_sum_numba, (t, c, w, 0.1, 6553.6)
    # off-dual-grid LCT evaluation
    x = np.linspace(-4, 4, 801)
    g = rng.normal(size=801) + 1j * rng.normal(size=801)
    f = np.linspace(-30, 30, 1001)
    yield "fourier_sum 801 x 1001", K.fourier_sum_numpy, K.fourier_sum_numba, (x, g, f)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.USE_NUMBA:
        raise SystemExit("numba is disabled or unavailable; nothing to compare")
    print(f"{'case':36s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, np_fn, nb_fn, argv in cases():
        t_np = best_of(lambda: np_fn(*argv), args.repeat)
        t_nb = best_of(lambda: nb_fn(*argv), args.repeat)
        diff = np.max(np.abs(np_fn(*argv) - nb_fn(*argv)))
        print(f"{name:36s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
