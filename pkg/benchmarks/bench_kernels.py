"""Time the compiled grid kernels against the numpy fallback on a sphere-sized sample.

    python3 benchmarks/bench_kernels.py [--n-theta 512] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from spinfields import _kernels_py
from spinfields.field_model import SphereSynthesizer, SpinSpectrum, sample_coefficients
from spinfields.grids import SphereGrid

try:
    from spinfields import _kernels as compiled
except ImportError:
    compiled = None


def workload(n_theta):
    grid = SphereGrid(n_theta, 2 * n_theta)
    spec = SpinSpectrum.monochromatic(10, 2)
    f = SphereSynthesizer(spec, grid).synthesize(sample_coefficients(spec, 0)).values
    level = np.abs(f) - 1.0
    cx = grid.complex
    active = np.concatenate([(level >= 0).ravel(), [True, True]])
    return {
        "bilinear_roots": lambda m: m.bilinear_roots(f.real, f.imag, True, None),
        "contour_length": lambda m: m.contour_length(level, grid.dtheta, grid.dphi, float(grid.theta[0]), True, True, None),
        "label_components": lambda m: m.label_components(cx.n_vertices, cx.edges, active),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-theta", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    jobs = workload(args.n_theta)
    print(f"grid {args.n_theta}x{2 * args.n_theta}, best of {args.repeat}")
    print(f"{'kernel':<18}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>9}")
    for name, job in jobs.items():
        tp = min(timeit.repeat(lambda: job(_kernels_py), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{name:<18}{tp:>12.4f}{'n/a':>14}{'':>9}")
            continue
        tc = min(timeit.repeat(lambda: job(compiled), number=1, repeat=args.repeat))
        print(f"{name:<18}{tp:>12.4f}{tc:>14.4f}{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
