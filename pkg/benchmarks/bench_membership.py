"""Membership-kernel benchmark: compiled extension vs numpy fallback.

Classifies Gaussian sample batches against Minkowski combinations with
both backends and reports throughput plus agreement. Run from the repo
root:

    python3 benchmarks/bench_membership.py [--samples N] [--repeat R]
"""

import argparse
import time

import numpy as np

from gaussbm import geometry
from gaussbm.geometry import (
    Box,
    Ellipsoid,
    MinkowskiCombination,
    PNormBall,
    _combo_call_args,
)
from gaussbm.rng import stream
from gaussbm import _combo_np

try:
    from gaussbm import _combo_cy
except ImportError:
    _combo_cy = None


CASES = [
    ("ellipse+box 2d",
     MinkowskiCombination(Ellipsoid(np.diag([1.0, 0.25])),
                          Box((1.0, 1.0)), 0.5)),
    ("l1+box 3d",
     MinkowskiCombination(PNormBall(1.0, 1.5, 3), Box((0.7, 0.7, 0.7)), 0.5)),
    ("ball+ellipsoid 3d",
     MinkowskiCombination(PNormBall(2.0, 1.2, 3),
                          Ellipsoid(np.diag([1.0, 0.5, 0.25])), 0.3)),
]


def bench_backend(kernel, mc, pts, repeat):
    args = _combo_call_args(mc, 1e-9, 500)
    best = np.inf
    verdict = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        verdict = kernel.classify_batch(pts, *args)
        best = min(best, time.perf_counter() - t0)
    return best, verdict


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"active geometry backend: {geometry.KERNEL_BACKEND}")
    if _combo_cy is None:
        print("compiled extension not importable; benchmarking numpy only")
    header = f"{'case':>20} {'backend':>8} {'points/s':>12} {'best s':>9}"
    print(header)
    print("-" * len(header))
    for name, mc in CASES:
        pts = stream(0, "bench").standard_normal((args.samples, mc.dim))
        rows = [("numpy", _combo_np)]
        if _combo_cy is not None:
            rows.append(("cython", _combo_cy))
        verdicts = {}
        for label, kernel in rows:
            secs, verdict = bench_backend(kernel, mc, pts, args.repeat)
            verdicts[label] = verdict
            print(f"{name:>20} {label:>8} {args.samples / secs:>12.0f} "
                  f"{secs:>9.4f}")
        if len(verdicts) == 2:
            agree = np.array_equal(verdicts["numpy"], verdicts["cython"])
            print(f"{'':>20} verdicts agree: {agree}")


if __name__ == "__main__":
    main()
