"""Compare the numba kernels with the numpy fallback.

Each backend runs in its own interpreter because QTENSOR_NUMBA is read at
import time. Compilation is excluded by a warmup pass.

    python benchmarks/bench_kernels.py [--repeat 5]
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
from qtensor import GenSpec, TcpInstance, backend_name, kernels, random, solve_enumerate, solve_vi

repeat = int(sys.argv[1])
kernels.warmup()
rng = np.random.default_rng(0)

def best(fn):
    fn()
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out)

A = random(GenSpec("random_general", 4, 8, seed=1))
x = rng.normal(size=8)
X = rng.normal(size=(256, 8))
B = random(GenSpec("random_nonnegative", 3, 4, seed=2))
C = random(GenSpec("random_general", 3, 4, seed=3))
q = rng.uniform(-1, 1, size=4)
res = {
    "backend": backend_name(),
    "contract m=4 n=8 (x1000)": best(lambda: [kernels.contract(A.idx, A.vals, x, 8) for _ in range(1000)]),
    "batch_contract 256 rows": best(lambda: kernels.batch_contract(A.idx, A.vals, X, 8)),
    "batch_jacobian 256 rows": best(lambda: kernels.batch_jacobian(A.idx, A.vals, X, 8, 8)),
    "solve_enumerate nonneg m=3 n=4": best(lambda: solve_enumerate(TcpInstance(B, q))),
    "solve_enumerate general m=3 n=4": best(lambda: solve_enumerate(TcpInstance(C, q))),
    "solve_vi m=3 n=4": best(lambda: solve_vi(TcpInstance(B, q))),
}
print(json.dumps(res))
"""


def run(flag: str, repeat: int) -> dict:
    env = dict(os.environ, QTENSOR_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    t0 = time.perf_counter()
    fast, slow = run("1", args.repeat), run("0", args.repeat)
    print(f"{'benchmark':<36}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key], slow[key]
        print(f"{key:<36}{a * 1e3:>10.2f}ms{b * 1e3:>10.2f}ms{b / a:>9.1f}x")
    print(f"(best of {args.repeat}; total {time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
