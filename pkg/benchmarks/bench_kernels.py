"""Time element-matrix assembly with the numba kernels and the numpy fallback.

Each backend runs in its own interpreter because BIOT_NUMBA is read at import time.

    python3 benchmarks/bench_kernels.py [--nx 32] [--degree 4] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from biot._accel import default_backend
from biot.fem import FunctionSpace, assemble_form, assemble_load, mass_matrix, stiffness_matrix
from biot.mesh import build_rect_mesh
from biot.problem import ManufacturedCase

nx, k, repeat = map(int, sys.argv[1:4])
case = ManufacturedCase()
mesh = build_rect_mesh(nx, nx)
V, W, M = FunctionSpace(mesh, k, 1), FunctionSpace(mesh, k - 1), FunctionSpace(mesh, k)
jobs = {
    "a1 (elasticity)": lambda: assemble_form("a1", V, V, case.params),
    "b (divergence)": lambda: assemble_form("b", V, W, case.params),
    "mass P_k": lambda: mass_matrix(M),
    "stiffness P_k": lambda: stiffness_matrix(M),
    "load f": lambda: assemble_load(case.body_force(0.5), V),
}
for job in jobs.values():  # warm-up, includes JIT compilation
    job()
out = {"backend": default_backend()}
for name, job in jobs.items():
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        job()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(flag, args):
    env = dict(os.environ, BIOT_NUMBA=flag)
    cmd = [sys.executable, "-c", WORKER, str(args.nx), str(args.degree), str(args.repeat)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, default=32)
    ap.add_argument("--degree", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    nb, np_ = run("1", args), run("0", args)
    if nb["backend"] != "numba":
        print("numba is unavailable; both columns use numpy")
    print(f"mesh {args.nx}x{args.nx}, P{args.degree} displacement, best of {args.repeat}")
    print(f"{'kernel':<18}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name in nb:
        if name == "backend":
            continue
        print(f"{name:<18}{nb[name]:>12.4f}{np_[name]:>12.4f}{np_[name] / nb[name]:>10.2f}")


if __name__ == "__main__":
    main()
