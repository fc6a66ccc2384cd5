"""Time the numpy and numba kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]
"""
import argparse
import time

import numpy as np

from isounit import kernels, lengthreg
from isounit.harness import SyntheticSpec, generate_corpus


def workloads(scale, seed=0):
    rng = np.random.default_rng(seed)
    n_frames = int(2_000_000 * scale)
    z = np.repeat(rng.integers(0, 100, size=n_frames // 4), rng.integers(1, 8, size=n_frames // 4))
    corpus = generate_corpus(SyntheticSpec(n_sequences=int(20_000 * scale), jitter_percent=20, seed=seed))
    values, offsets = lengthreg.pack([d.astype(np.float64) for _, d, _ in corpus])
    targets = np.array([t for _, _, t in corpus], dtype=np.int64)
    x = rng.standard_normal((int(50_000 * scale), 32))
    c = rng.standard_normal((100, 32))

    def run_lengths(kb):
        return kb.run_lengths(z)

    units, durs = kernels.get_backend("numpy").run_lengths(z)

    def expand_runs(kb):
        return kb.expand_runs(units, durs)

    def bound_batch(kb):
        return kb.bound_batch(values, offsets, targets)

    def early_stop_batch(kb):
        return kb.early_stop_batch(values, offsets, targets)

    def assign_nearest(kb):
        return kb.assign_nearest(x, c)

    labels = kernels.get_backend("numpy").assign_nearest(x, c)[0]

    def centroid_sums(kb):
        return kb.centroid_sums(x, labels, c.shape[0])

    return [run_lengths, expand_runs, bound_batch, early_stop_batch, assign_nearest, centroid_sums]


def best_time(fn, kb, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(kb)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args(argv)

    names = kernels.available_backends()
    backends = {n: kernels.get_backend(n) for n in names}
    jobs = workloads(args.scale)
    for kb in backends.values():  # compile / warm caches
        for fn in jobs:
            fn(kb)

    print(f"{'kernel':<18}" + "".join(f"{n + ' (ms)':>14}" for n in names) + ("  speedup" if len(names) > 1 else ""))
    for fn in jobs:
        times = [best_time(fn, backends[n], args.repeat) for n in names]
        row = f"{fn.__name__:<18}" + "".join(f"{t * 1e3:>14.2f}" for t in times)
        if len(times) > 1:
            row += f"  {times[0] / times[1]:>6.1f}x"
        print(row)
    if "numba" not in names:
        print("numba unavailable or disabled; only the numpy backend was timed")


if __name__ == "__main__":
    main()
