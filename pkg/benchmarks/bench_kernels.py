"""Compare compiled kernels against the pure-Python fallback path.

Usage:
    python benchmarks/bench_kernels.py [--nodes 100] [--repeat 200]

With numba available, each kernel's ``py_func`` is the uncompiled original,
so both variants run the identical source. When VNEMB_NO_NUMBA=1 is set the
package itself runs the fallback; this script then reports fallback numbers
only.
"""

import argparse
import time

import numpy as np

from vnemb import kernels
from vnemb.netmodel import generate_waxman_topology


def timeit(fn, repeat):
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--nodes", type=int, default=100)
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()

    pn = generate_waxman_topology(args.nodes, 0.5, 0.2, seed=0)
    n, m = pn.num_nodes, pn.num_links
    ip, nb, ei = pn.indptr, pn.nbr, pn.eid
    rng = np.random.default_rng(0)
    avail = rng.uniform(50, 100, m)
    pairs = [(int(a), int(b)) for a, b in rng.integers(0, n, (64, 2)) if a != b]
    paths = np.full((10, n + 1), -1, dtype=np.int32)
    plens = np.zeros(10, dtype=np.int64)
    zero = np.zeros(0)

    dem = np.abs(rng.uniform(0, 20, (1, 6)))
    va = np.array([0, 0, 1, 2, 3, 4], dtype=np.int32)
    vb = np.array([1, 2, 3, 4, 5, 5], dtype=np.int32)
    ldem = rng.uniform(0, 50, 6)
    order = np.arange(6, dtype=np.int32)
    node_avail = np.tile(rng.uniform(50, 100, n), (1, 1))

    def bench_route(fn):
        for src, dst in pairs:
            fn(ip, nb, ei, n, m, src, dst, 10, True, avail, 25.0,
               np.zeros(m), -1.0, paths, plens)

    def bench_ksp(fn):
        for src, dst in pairs[:16]:
            fn(ip, nb, ei, n, m, src, dst, 10, False, zero, 0.0, zero, -1.0,
               paths, plens)

    def bench_rollout(fn):
        for seed in range(16):
            assign = np.full(6, -1, dtype=np.int32)
            fn(ip, nb, ei, n, m, node_avail.copy(), avail.copy(), dem, va, vb,
               ldem, np.full(6, -1.0), order, 0, assign, 10, np.zeros(m),
               False, kernels.make_rng_state(seed))

    def bench_betweenness(fn):
        fn(ip, nb, ei, n)

    cases = [
        ("route (first feasible, k=10) x64", kernels.ksp_search, bench_route, args.repeat),
        ("ksp (all k=10 paths) x16", kernels.ksp_search, bench_ksp, max(args.repeat // 4, 1)),
        ("rollout (6-node request) x16", kernels.rollout_uniform, bench_rollout, args.repeat),
        ("betweenness (full graph)", kernels.betweenness_all, bench_betweenness, max(args.repeat // 10, 1)),
    ]

    kernels.warmup()
    print(f"graph: {n} nodes, {m} links; numba "
          f"{'ON' if kernels.NUMBA_ENABLED else 'OFF (fallback only)'}")
    header = f"{'kernel':38s} {'compiled':>12s} {'fallback':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for label, kernel, runner, repeat in cases:
        fast = timeit(lambda: runner(kernel), repeat)
        if kernels.NUMBA_ENABLED:
            slow = timeit(lambda: runner(kernel.py_func), max(repeat // 50, 2))
            print(f"{label:38s} {fast * 1e3:9.3f} ms {slow * 1e3:9.3f} ms "
                  f"{slow / fast:8.1f}x")
        else:
            print(f"{label:38s} {'-':>12s} {fast * 1e3:9.3f} ms {'':>9s}")


if __name__ == "__main__":
    main()
