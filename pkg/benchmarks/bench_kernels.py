"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one CSV row per kernel: name, cython seconds, numpy seconds, speedup.
"""

import argparse
import timeit

import numpy as np

from metriclen import _fallback
from metriclen._backend import EUCLIDEAN, PNORM, SPHERICAL

try:
    from metriclen import _ckernels
except ImportError:
    _ckernels = None


def _cases():
    rng = np.random.default_rng(0)
    t = np.linspace(0.0, 2 * np.pi, 2**20 + 1)
    circle = np.ascontiguousarray(np.column_stack((np.cos(t), np.sin(t))))
    cloud = rng.standard_normal((2000, 3))
    sphere = cloud / np.linalg.norm(cloud, axis=1)[:, None]
    path = np.ascontiguousarray(sphere[:65])

    def sweeps(mod, n=200):
        V = path.copy()
        for _ in range(n):
            mod.relax_half(V, 1, True)
            mod.relax_half(V, 0, True)
            V = mod.respace(V, mod.chord_lengths(V, SPHERICAL, 2.0), True)

    return {
        "chord_sum euclidean 2^20": lambda mod: mod.chord_sum(circle, EUCLIDEAN, 2.0),
        "chord_sum pnorm:3 2^20": lambda mod: mod.chord_sum(circle, PNORM, 3.0),
        "pairwise_max sphere 2000": lambda mod: mod.pairwise_max(sphere, SPHERICAL, 2.0),
        "200 shortening sweeps, 65 vertices": sweeps,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; nothing to compare")
        return
    print("kernel,cython_s,numpy_s,speedup")
    for name, fn in _cases().items():
        fast = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
        slow = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat))
        print(f"{name},{fast:.4g},{slow:.4g},{slow / fast:.1f}")


if __name__ == "__main__":
    main()
