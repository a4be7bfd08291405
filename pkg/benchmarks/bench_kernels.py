"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best wall time of each backend and the
speedup. Both backends are imported directly, so the environment switch for
the fallback does not matter here.
"""

import argparse
import timeit

import numpy as np

from bcerasure import _pykernels as py
from bcerasure.types_core import simplex_lattice

try:
    from bcerasure import _ckernels as cy
except ImportError:
    cy = None


def _problem(rng, nu=2, nx=2, ny=2):
    p = rng.dirichlet(np.ones(nu * nx))
    w = rng.dirichlet(np.ones(ny), size=nu * nx)
    groups = np.repeat(np.arange(nu), nx)
    pu = p.reshape(nu, nx).sum(axis=1)
    return p, np.log2(w), groups, pu


def cases(rng):
    codes = rng.integers(0, 4, size=(64, 8))
    ys = rng.integers(0, 2, size=(256, 8))
    p, logw, groups, pu = _problem(rng)
    vs = rng.dirichlet(np.ones(2), size=(4096, 4))
    lattice = simplex_lattice(20, 2)
    q0 = np.full(2, 0.5)
    return {
        "batch_empirical_mi 256x64 n=8": lambda m: m.batch_empirical_mi(codes, ys, 4, 2),
        "objective_batch 4096 penalized": lambda m: m.objective_batch(
            vs, p, logw, groups, pu, 2.0, 0.3, 0.1, py.PENALIZED, 0.0),
        "grid_scan k=20 penalized": lambda m: m.grid_scan(
            lattice, p, logw, groups, pu, 2.0, 0.3, 0.1, py.PENALIZED, 0.0, 8),
        "tilted_channel rho=0.7": lambda m: m.tilted_channel(logw, p, 0.7, q0, 5000, 1e-15),
    }


def best(fn, repeat):
    t = timeit.Timer(fn)
    loops, _ = t.autorange()
    return min(t.repeat(repeat, loops)) / loops


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'python':>11s} {'compiled':>11s} {'speedup':>8s}")
    for name, call in cases(rng).items():
        tp = best(lambda: call(py), args.repeat)
        if cy is None:
            print(f"{name:34s} {tp * 1e3:9.3f}ms {'n/a':>11s} {'n/a':>8s}")
            continue
        tc = best(lambda: call(cy), args.repeat)
        print(f"{name:34s} {tp * 1e3:9.3f}ms {tc * 1e3:9.3f}ms {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
