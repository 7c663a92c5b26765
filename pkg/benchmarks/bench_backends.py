"""Timing comparison: compiled propagation chain vs the numpy fallback.

Run as

    python benchmarks/bench_backends.py [--steps 200000] [--repeats 5]

The chain benchmark isolates the hot kernel; the end-to-end rows time a
coefficient fit and an eigenvalue solve under each backend (the fallback is
selected by re-importing with TRANSMUTE_FORCE_PYTHON=1 in a subprocess, so
both numbers come from a clean interpreter).
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

_END_TO_END = r"""
import json, time
import numpy as np
from transmute._backend import BACKEND
from transmute.coeffs import compute_beta
from transmute.oracle import ProblemSetup
from transmute.spectral import dirichlet_eigenvalues

setup = ProblemSetup(l=1.0, b=np.pi, q=lambda x: np.asarray(x) ** 2)
t0 = time.perf_counter()
beta = compute_beta(setup, np.pi, 25)
t_fit = time.perf_counter() - t0
t0 = time.perf_counter()
rep = dirichlet_eigenvalues(setup, 50, beta=beta)
t_solve = time.perf_counter() - t0
print(json.dumps({"backend": BACKEND, "fit": t_fit, "solve": t_solve,
                  "omega_50": rep.eigenvalues[-1]}))
"""


def bench_chain(steps: int, repeats: int):
    from transmute import _kernels_py

    try:
        from transmute import _kernels
    except ImportError:
        _kernels = None

    rng = np.random.default_rng(0)
    theta = rng.uniform(-0.02, 0.02, steps)
    m11 = np.cos(theta)
    m12 = -np.sin(theta)
    m21 = np.sin(theta)
    m22 = np.cos(theta)
    idx = np.linspace(0, steps, 40).astype(np.int64)

    def run(fn):
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            w, wp = fn(m11, m12, m21, m22, 1.0, 0.0, idx)
            best = min(best, time.perf_counter() - t0)
        return best, float(w[-1])

    rows = []
    t_py, w_py = run(_kernels_py.chain_2x2)
    rows.append(("python", t_py, w_py))
    if _kernels is not None:
        t_cy, w_cy = run(_kernels.chain_2x2)
        rows.append(("cython", t_cy, w_cy))
        if abs(w_cy - w_py) > 1e-12 * max(1.0, abs(w_py)):
            raise SystemExit("backends disagree; benchmark aborted")
    return rows


def bench_end_to_end():
    rows = []
    for env_extra in ({}, {"TRANSMUTE_FORCE_PYTHON": "1"}):
        env = dict(os.environ, **env_extra)
        res = subprocess.run(
            [sys.executable, "-c", _END_TO_END], env=env,
            capture_output=True, text=True, check=True,
        )
        rows.append(json.loads(res.stdout.strip().splitlines()[-1]))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()

    print(f"chain_2x2, {args.steps} steps, best of {args.repeats}:")
    rows = bench_chain(args.steps, args.repeats)
    base = dict((name, t) for name, t, _ in rows)["python"]
    for name, t, _ in rows:
        print(f"  {name:7s} {t * 1e3:8.2f} ms   ({base / t:4.1f}x vs python)")

    if not args.skip_end_to_end:
        print("end-to-end (fit M=25 + 50 eigenvalues, fresh interpreter):")
        for row in bench_end_to_end():
            print(f"  {row['backend']:7s} fit {row['fit']:6.2f} s   "
                  f"solve {row['solve']:6.2f} s   omega_50 = {row['omega_50']:.12f}")


if __name__ == "__main__":
    main()
