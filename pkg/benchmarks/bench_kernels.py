"""Compare the compiled kernels against the numpy/Python reference on a closed universe.

    python3 benchmarks/bench_kernels.py --size-bound 5 --type-bound 4 --repeat 5
"""

import argparse
import statistics
import sys
import time

import numpy as np

from hogpred import _kernels_py
from hogpred.law import get_law
from hogpred.syntax import Universe, close_universe
from hogpred.tables import build_tables

try:
    from hogpred import _kernels as compiled
except ImportError:
    compiled = None


def timed(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size-bound", type=int, default=5)
    ap.add_argument("--type-bound", type=int, default=4)
    ap.add_argument("--law", default="xtcl-cbn")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    sys.setrecursionlimit(20000)

    law = get_law(args.law)
    u = Universe.build(args.size_bound, args.type_bound)
    close_universe(u, law.gamma)
    u.freeze()
    tb = build_tables(law, u)
    rng = np.random.default_rng(args.seed)
    S = np.ones(len(u), dtype=np.uint8)
    P = (rng.random(len(u)) < 0.97).astype(np.uint8)
    step = np.ascontiguousarray(np.where(tb.step1 == -2, -1, tb.step1))
    print(f"universe: {len(u)} members, {len(tb.app_res)} labelled pairs, closed={u.is_closed}")

    impls = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    rows, results = [], {}
    for name, impl in impls:
        (g, sweeps), t_gfp = timed(lambda: impl.gfp_relative(tb.step_ptr, tb.step_res, tb.app_ptr, tb.app_label,
                                                               tb.app_res, S, P), args.repeat)
        steps, t_steps = timed(lambda: impl.steps_to_value(tb.kind, step, 10_000), args.repeat)
        results[name] = (np.asarray(g), np.asarray(steps))
        rows.append((name, t_gfp, int(sweeps), t_steps))

    print(f"{'backend':8} {'gfp_relative':>14} {'sweeps':>7} {'steps_to_value':>16}")
    for name, t_gfp, sweeps, t_steps in rows:
        print(f"{name:8} {t_gfp * 1e3:11.2f} ms {sweeps:7d} {t_steps * 1e3:13.2f} ms")
    if len(rows) == 2:
        (_, gp, _, sp), (_, gc, _, sc) = rows
        same = all(np.array_equal(a, b) for a, b in zip(results["python"], results["cython"]))
        print(f"speed-up: gfp x{gp / gc:.1f}, steps x{sp / sc:.1f}; outputs identical: {same}")
    else:
        print("compiled extension not built; only the reference backend was timed")


if __name__ == "__main__":
    main()
