"""Compare the compiled and numpy kernel backends on zero-test workloads.

    python3 benchmarks/bench_kernel.py [--points 50,2000] [--repeat R]

Zero tests evaluate batches of a few dozen points, where the per-instruction
numpy overhead dominates; large batches show where vectorised numpy catches up.
"""

import argparse
import time

import numpy as np

from tensorcat import geometry as G
from tensorcat import kernels as K
from tensorcat import scalar as S
from tensorcat.laws import random_expr


def workloads():
    sw = G.schwarzschild()
    yield "gr_lhs (schwarzschild)", [e for row in G.gr_lhs(sw) for e in row], sw.domain
    r = G.curvature(sw)
    yield "riemann (schwarzschild)", [e for a in r for b in a for c in b for e in c], sw.domain
    rng = np.random.default_rng(0)
    exprs = [random_expr(rng, ["x", "y"], depth=6) for _ in range(200)]
    yield "200 random expressions", exprs, S.Domain({"x": (-2.0, 2.0), "y": (-2.0, 2.0)})


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", default="50,2000", help="comma-separated batch sizes")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = K.backends()
    sizes = [int(x) for x in args.points.split(",") if x]
    print(f"backends: {', '.join(backends)}; best of {args.repeat}")
    for (name, exprs, dom), n in ((w, n) for w in list(workloads()) for n in sizes):
        prog = K.compile_exprs(exprs)
        pts = S.sample_points(dom, prog.variables, n, np.random.default_rng(1))
        row = {b: best_of(lambda m=m: K.run_program(prog, pts, m), args.repeat) for b, m in backends.items()}
        ref = K.run_program(prog, pts, backends["python"])
        for b, m in backends.items():
            vals, bad = K.run_program(prog, pts, m)
            assert np.array_equal(bad, ref[1]) and np.allclose(vals, ref[0], equal_nan=True), b
        cells = "  ".join(f"{b} {t * 1e3:8.2f} ms" for b, t in row.items())
        speed = f"  speedup {row['python'] / row['cython']:.1f}x" if "cython" in row else ""
        print(f"{name:26s} {prog.size:4d} instr {n:6d} pts  {cells}{speed}")


if __name__ == "__main__":
    main()
