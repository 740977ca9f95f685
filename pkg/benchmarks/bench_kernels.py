"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import itertools
import timeit

import numpy as np

from ctbound import _pykernels

try:
    from ctbound import _kernels
except ImportError:
    _kernels = None


def kruskal_case(rng, n=300, m=3000):
    pairs = set()
    perm = rng.permutation(n)
    for i in range(1, n):
        u, v = int(perm[i]), int(perm[rng.integers(0, i)])
        pairs.add((min(u, v), max(u, v)))
    while len(pairs) < m:
        u, v = sorted(rng.choice(n, 2, replace=False).tolist())
        pairs.add((u, v))
    eu = np.array([p[0] for p in pairs], dtype=np.int64)
    ev = np.array([p[1] for p in pairs], dtype=np.int64)
    order = np.argsort(rng.random(m), kind="stable").astype(np.int64)
    state = np.zeros(m, dtype=np.int8)
    return lambda mod: mod.kruskal(n, eu, ev, order, state)


def stable_sets_case(rng, n=20, density=0.3):
    masks = [0] * n
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < density:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
    arr = np.array(masks, dtype=np.int64)
    return lambda mod: mod.stable_sets(n, arr, 0, n)


def bilayer_case(rng, n=400, density=0.05):
    adj = [[] for _ in range(n)]
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < density:
            adj[u].append(v)
            adj[v].append(u)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    indices = np.array([v for a in adj for v in sorted(a)], dtype=np.int64)
    y = rng.uniform(0, 0.5, size=n)
    return lambda mod: mod.bilayer_paths(indptr, indices, y, 0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ns = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    cases = {
        "kruskal (300 v, 3000 e)": kruskal_case(rng),
        "stable_sets (20 v, p=0.3)": stable_sets_case(rng),
        "bilayer_paths (400 v, p=0.05)": bilayer_case(rng),
    }
    print(f"{'kernel':32s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, run in cases.items():
        py = min(timeit.repeat(lambda: run(_pykernels), number=1, repeat=ns.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:32s} {py:10.2f} {'-':>10s} {'-':>8s}")
            continue
        cy = min(timeit.repeat(lambda: run(_kernels), number=1, repeat=ns.repeat)) * 1e3
        print(f"{name:32s} {py:10.2f} {cy:10.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
