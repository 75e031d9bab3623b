"""Compiled vs numpy kernels on the same networks and streams.

    python benchmarks/bench_kernels.py [--nodes 100000] [--mean 10] [--reps 5]

Both backends consume identical draws, so the final sizes must agree; the
script checks that before reporting timings.
"""
import argparse
import time

import numpy as np

from maskspread import _kernels_py, kernels, netgen
from maskspread.degree import Poisson
from maskspread.masks import MaskEnsemble


def timed(fn, reps):
    best = np.inf
    out = None
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=100_000)
    ap.add_argument("--mean", type=float, default=10.0)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    compiled = kernels.load("cython")
    ens = MaskEnsemble.from_efficiencies([0.2, 0.5, 1.0], [0.3, 0.5, 1.0], 0.6, [0.3, 0.6, 0.1])
    rng = np.random.default_rng(0)
    net = netgen.generate(Poisson(args.mean), args.nodes, rng)
    netgen.assign_types(net, ens.m, rng)
    stubs = net.edges.ravel().copy()
    T = np.ascontiguousarray(ens.T)
    # a seed whose outbreak takes off, so the spread timing covers a full epidemic
    seed = next(s for s in range(args.nodes)
                if compiled.spread(net.offsets, net.neighbors, net.node_type, T, s, np.random.PCG64(s)).size
                > 0.05 * args.nodes)

    print(f"n={args.nodes} mean={args.mean} edges={net.n_edges}")
    for name, fn_c, fn_p in [
        ("build_adjacency",
         lambda: compiled.build_adjacency(stubs, args.nodes),
         lambda: _kernels_py.build_adjacency(stubs, args.nodes)),
        ("spread",
         lambda: compiled.spread(net.offsets, net.neighbors, net.node_type, T, seed, np.random.PCG64(seed)),
         lambda: _kernels_py.spread(net.offsets, net.neighbors, net.node_type, T, seed, np.random.PCG64(seed))),
    ]:
        tc, oc = timed(fn_c, args.reps)
        tp, op = timed(fn_p, max(1, args.reps // 2))
        same = np.array_equal(oc, op) if name == "spread" else all(map(np.array_equal, oc, op))
        print(f"{name:16s} cython {tc * 1e3:9.2f} ms   python {tp * 1e3:9.2f} ms   "
              f"speedup {tp / tc:6.1f}x   identical={same}")


if __name__ == "__main__":
    main()
