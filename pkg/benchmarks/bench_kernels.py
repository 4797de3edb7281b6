"""Time the numba and numpy kernel backends on the same workloads.

    python benchmarks/bench_kernels.py [--repeat N]

Each backend runs in its own interpreter because the backend is chosen at
import time (``FIXGEN_BACKEND``).  Compilation is excluded by a warm-up call.
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from fixgen import kernels
from fixgen.kernels import backend

rng = np.random.default_rng(0)
repeat = int(sys.argv[1])


def anchors(m, d):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    X = rng.standard_normal((m, d)) * 3.0
    Y = 0.7 * X @ Q.T + rng.standard_normal(d)
    return X, Y


def clock(fn):
    fn()
    t = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t) / repeat

out = {"backend": backend()}
for m in (20, 120, 1000):
    X, Y = anchors(m, 8)
    q = rng.standard_normal(8)
    rad = np.linalg.norm(X - q, axis=1)
    out[f"minmax_ball_center m={m}"] = clock(lambda: kernels.minmax_ball_center(Y, rad, Y[0].copy(), 1e-9))
V = rng.standard_normal((40, 8))
p = 5 * rng.standard_normal(8)
out["nearest_in_hull 40x8"] = clock(lambda: kernels.nearest_in_hull(V, p, 1e-14))
A = rng.standard_normal((12, 8))
b = np.abs(rng.standard_normal(12))
out["dykstra_halfspaces 12x8"] = clock(lambda: kernels.dykstra_halfspaces(p, A, b, 100000, 1e-10))
X, Y = anchors(2000, 8)
out["pairwise_ratio_max 2000"] = clock(lambda: kernels.pairwise_ratio_max(X, Y, 0.0))
print(json.dumps(out))
"""


def run(backend, repeat):
    env = dict(os.environ, FIXGEN_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    t0 = time.perf_counter()
    fast, slow = run("numba", args.repeat), run("numpy", args.repeat)
    print(f"{'workload':32s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key] * 1e3, slow[key] * 1e3
        print(f"{key:32s} {a:10.3f} {b:10.3f} {b / a:8.1f}")
    print(f"total wall time {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
