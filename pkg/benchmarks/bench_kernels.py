"""Time the numba and numpy kernel paths.

    python benchmarks/bench_kernels.py [--problems 20000] [--epochs 1000]

Kernel timings call both implementations directly in one process.  The
end-to-end timing runs ``run_comparison`` in a subprocess per backend,
selected through COOPRANGING_DISABLE_NUMBA.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from coopranging import kernels

E2E = """
import time
from coopranging import harness, kernels
harness.run_comparison(harness.simulate_session(5, seed=1), 3.0)
t = time.perf_counter()
pairs = harness.simulate_session({epochs}, seed=0)
harness.run_comparison(pairs, 3.0)
print(kernels.BACKEND, time.perf_counter() - t)
"""


def make_problems(n, rng):
    sats = rng.normal(size=(n, 8, 3))
    sats *= 2.656e7 / np.linalg.norm(sats, axis=2)[..., None]
    rx = np.array([6.378e6, 0.0, 0.0])
    sats[..., 0] = np.abs(sats[..., 0])
    pr = np.linalg.norm(sats - rx, axis=2) + rng.uniform(-1e5, 1e5, size=(n, 1))
    H = rng.normal(size=(n, 7, 3))
    w = rng.uniform(500, 1200, size=(n, 7))
    y = rng.normal(size=(n, 7))
    return sats, pr, H, w, y


def bench(fn, *arrays):
    fn(*(a[0] for a in arrays))  # compile / warm up
    t = time.perf_counter()
    for parts in zip(*arrays):
        fn(*parts)
    return time.perf_counter() - t


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problems", type=int, default=20000)
    ap.add_argument("--epochs", type=int, default=1000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    sats, pr, H, w, y = make_problems(args.problems, rng)
    x0 = np.zeros((args.problems, 4))
    tol = np.full(args.problems, 1e-4)
    iters = np.full(args.problems, 20)

    impls = [("numpy", kernels.normal_solve_numpy, kernels.gauss_newton_fix_numpy)]
    if kernels.numba is not None:
        impls.append(("numba", kernels.normal_solve_numba, kernels.gauss_newton_fix_numba))

    print(f"{'kernel':<18}{'backend':<8}{'total s':>10}{'us/call':>10}")
    for name, solve, fix in impls:
        for label, fn, arrays in (("normal_solve", solve, (H, w, y)),
                                  ("gauss_newton_fix", fix, (sats, pr, x0, tol, iters))):
            dt = bench(fn, *arrays)
            print(f"{label:<18}{name:<8}{dt:>10.3f}{1e6 * dt / args.problems:>10.1f}")

    print(f"\nend-to-end: simulate + run_comparison, {args.epochs} epochs")
    for flag in ("0", "1"):
        env = dict(os.environ, COOPRANGING_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", E2E.format(epochs=args.epochs)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<8}{float(out[1]):>8.2f} s")


if __name__ == "__main__":
    main()
