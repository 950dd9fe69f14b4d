"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with both timings and the speedup.
"""
import argparse
import timeit

import numpy as np

from wlembed import kernels
from wlembed.nn import make_batch, normalized_adjacency, EncodedGraph
from wlembed.synthetic import (GeneratorSpec, TARGET_PATTERNS, _bitmasks, _search_order,
                               generate_negative)


def cases(rng):
    spec = GeneratorSpec(task="detection")
    graphs = [generate_negative(spec, rng) for _ in range(200)]
    patterns = list(TARGET_PATTERNS.values())
    sub = [(_bitmasks(g), _bitmasks(p), _search_order(p)) for g in graphs for p in patterns]

    batch = make_batch([EncodedGraph({}, normalized_adjacency(g), g.num_nodes) for g in graphs])
    A = batch.adjacency
    X = rng.normal(size=(A.shape[0], 32))
    idx = rng.integers(0, 400, size=A.shape[0]).astype(np.int64)
    return sub, A, X, idx


def run(backend, sub, A, X, idx):
    def subgraph():
        for g, p, o in sub:
            backend.subgraph_exists(g, p, o)

    def spmm():
        backend.csr_spmm(A.indptr, A.indices, A.data, X)

    def scatter():
        out = np.zeros((400, X.shape[1]))
        backend.scatter_add_rows(out, idx, X)

    return {"subgraph_exists": subgraph, "csr_spmm": spmm, "scatter_add_rows": scatter}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the python timings are shown")
    data = cases(np.random.default_rng(0))
    timings = {}
    for name, mod in backends.items():
        for kernel, fn in run(mod, *data).items():
            timings[(name, kernel)] = min(timeit.repeat(fn, number=3, repeat=args.repeat)) / 3
    for kernel in ("subgraph_exists", "csr_spmm", "scatter_add_rows"):
        py = timings[("python", kernel)]
        line = f"{kernel:18s} python {py * 1e3:9.3f} ms"
        if ("cython", kernel) in timings:
            cy = timings[("cython", kernel)]
            line += f"   cython {cy * 1e3:9.3f} ms   speedup {py / cy:6.1f}x"
        print(line)


if __name__ == "__main__":
    main()
