"""Time the compiled and pure-Python kernels.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Reports the inner circle fit per backend, and a full M-H axis estimate with
each backend (run in a subprocess so the backend is chosen at import).
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from mhhelix import kernels

AXIS_SNIPPET = """
import time
from mhhelix import kernels
from mhhelix.axisfit import estimate_axis_mh
from mhhelix.geometry import HelixParams, simulate_helix
from mhhelix.simlab import ALPHA_TURN
cloud = simulate_helix(HelixParams.with_axis(2.3, 0.859, ALPHA_TURN), 30, 0.05, 1)
t = time.perf_counter()
w = estimate_axis_mh(cloud).w
print(kernels.BACKEND, time.perf_counter() - t, *w)
"""


def time_circle_fit(impl, repeats):
    rng = np.random.default_rng(0)
    t = rng.uniform(0, 2 * np.pi, 30)
    y = np.column_stack([2.3 * np.cos(t), 2.3 * np.sin(t)]) + 0.2 * rng.standard_normal((30, 2))
    y -= y.mean(axis=0)
    x0 = np.array([0.0, 0.0, np.log(2.3), np.log(10.0)])
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = impl.fit_circle_nm(y, x0, 1e-8, 1e-10, 2000, 2, 0.1)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    results = {}
    for name, impl in kernels.available_backends().items():
        best, out = time_circle_fit(impl, args.repeats)
        results[name] = out
        print(f"circle fit  {name:7s} {best * 1e3:9.3f} ms  (nll {out[1]:.12g}, {out[3]} evals)")
    if len(results) == 2:
        same = np.array_equal(results["python"][0], results["cython"][0])
        print(f"backends bit-identical: {same}")

    for pure in ("1", "0"):
        env = dict(os.environ, MHHELIX_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", AXIS_SNIPPET], env=env, check=True,
                             capture_output=True, text=True).stdout.split()
        print(f"axis fit    {out[0]:7s} {float(out[1]):9.3f} s   w = "
              + " ".join(f"{float(v):+.12f}" for v in out[2:]))


if __name__ == "__main__":
    main()
