"""Compare compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-N wall time per kernel and backend, the speedup, and the
largest output difference between backends.
"""

import argparse
import time

import numpy as np

from nyquist_tdm import kernels
from nyquist_tdm.tdm_link import PRBS_MASK


def _cases(rng):
    f = np.sin(np.linspace(0.0, 10.0, 4001))
    bits = rng.integers(0, 2, size=(2048, 8), dtype=np.uint8)
    templates = rng.standard_normal((8, 32))
    noise = rng.standard_normal((2048, 32))
    weights = rng.standard_normal((8, 32))
    sparse = np.zeros((8, 32))
    sparse[np.arange(8), 4 * np.arange(8)] = 1.0
    noise_big = rng.standard_normal((65536, 32))
    bits_big = rng.integers(0, 2, size=(65536, 8), dtype=np.uint8)
    return {
        "lfsr_fill (10^6 bits)": lambda: kernels.lfsr_fill(1, PRBS_MASK, 1_000_000)[0],
        "frac_integral_uniform (n=4001)": lambda: kernels.frac_integral_uniform(f, 0.0025, 0.5),
        "frame_statistics dense (2048x8x32)": lambda: kernels.frame_statistics(bits, templates, noise, weights),
        "frame_statistics sampled (65536x8x32)": lambda: kernels.frame_statistics(
            bits_big, templates, noise_big, sparse
        ),
    }


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out, dtype=np.float64)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; timing the python backend only")
    cases = _cases(np.random.default_rng(0))
    initial = kernels.active_backend()
    print(f"{'kernel':40s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}{'max |diff|':>12s}")
    try:
        for name, fn in cases.items():
            times, outs = {}, {}
            for b in backends:
                kernels.use_backend(b)
                times[b], outs[b] = _best(fn, args.repeat)
            row = f"{name:40s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
            if len(backends) == 2:
                row += f"{times['python'] / times['compiled']:9.1f}x"
                row += f"{np.max(np.abs(outs['python'] - outs['compiled'])):12.2e}"
            print(row)
    finally:
        kernels.use_backend(initial)


if __name__ == "__main__":
    main()
