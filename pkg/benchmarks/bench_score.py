"""Timing comparison of the two weighted-center implementations.

The fused Cython kernel streams the softmax and the weighted sum in one
pass per query; the gemm path builds the full (Q, J) logit matrix with
BLAS.  The crossover depends on the state dimension: small d starves the
gemm of arithmetic per byte, large d amortizes it.

Run:  python3 benchmarks/bench_score.py [--repeats N]
"""

import argparse
import time

import numpy as np

from ensf.schedule import DiffusionSchedule
from ensf.score import Ensemble, available_backends, estimate_score

CASES = [
    # (ensemble size J, state dim d, queries Q, dtype)
    (2000, 4, 2000, np.float64),
    (2000, 4, 2000, np.float32),
    (500, 32, 500, np.float64),
    (100, 6400, 100, np.float64),
]


def run_case(j, d, q, dtype, backend, repeats):
    rng = np.random.default_rng(12345)
    ens = Ensemble(rng.standard_normal((j, d)).astype(dtype))
    z = rng.standard_normal((q, d)).astype(dtype)
    sched = DiffusionSchedule()
    estimate_score(z, ens, 0.5, sched, backend=backend)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        estimate_score(z, ens, 0.5, sched, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    print("backends available: %s" % ", ".join(backends))
    header = "%8s %6s %6s %8s" % ("J", "d", "Q", "dtype")
    header += "".join(" %12s" % b for b in backends)
    if len(backends) == 2:
        header += " %8s" % "speedup"
    print(header)
    for j, d, q, dtype in CASES:
        times = [run_case(j, d, q, dtype, b, args.repeats) for b in backends]
        line = "%8d %6d %6d %8s" % (j, d, q, np.dtype(dtype).name)
        line += "".join(" %10.3fms" % (t * 1e3) for t in times)
        if len(times) == 2:
            line += " %7.2fx" % (times[1] / times[0])
        print(line)


if __name__ == "__main__":
    main()
