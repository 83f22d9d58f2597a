"""Compare the compiled kernels against the pure-Python fallback.

Times the two hot paths (full engine runs on a planted float dataset, and
best-match Hamming matrices on descriptor sets) with identical seeds, and
verifies on the way that both backends return identical results.

Usage: python benchmarks/bench_backends.py [--sizes 200,600,1200]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from antclust import Parameters, compiled_available, run_antclust, similarity_matrix
from antclust.evaluation import generate_descriptor_dataset, generate_float_dataset


def _time(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_engine(n_items: int) -> None:
    clusters = max(2, n_items // 100)
    per_cluster = n_items // clusters
    dataset = generate_float_dataset(clusters, per_cluster, np.random.default_rng(0))
    params = Parameters(seed=42)
    t_pure, r_pure = _time(lambda: run_antclust(dataset.columns, params, backend="pure"), repeats=1)
    t_fast, r_fast = _time(lambda: run_antclust(dataset.columns, params, backend="compiled"), repeats=3)
    assert r_pure == r_fast, "backends disagree"
    n = clusters * per_cluster
    print(
        f"engine run   n={n:5d}  pure {t_pure * 1e3:9.1f} ms   "
        f"compiled {t_fast * 1e3:9.1f} ms   speedup {t_pure / t_fast:6.1f}x"
    )


def bench_hamming(items: int, descriptors: int) -> None:
    dataset = generate_descriptor_dataset(
        4, items // 4, np.random.default_rng(1), descriptors_per_item=descriptors
    )
    t_pure, m_pure = _time(lambda: similarity_matrix(dataset.columns, backend="pure"), repeats=1)
    t_fast, m_fast = _time(lambda: similarity_matrix(dataset.columns, backend="compiled"), repeats=3)
    assert np.array_equal(m_pure, m_fast), "backends disagree"
    print(
        f"hamming matrix n={items:3d} x {descriptors} descriptors  "
        f"pure {t_pure * 1e3:9.1f} ms   compiled {t_fast * 1e3:9.1f} ms   "
        f"speedup {t_pure / t_fast:6.1f}x"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes", default="200,600,1200", help="comma-separated engine dataset sizes"
    )
    args = parser.parse_args()
    if not compiled_available():
        raise SystemExit("compiled kernels are not built; nothing to compare")
    print("== engine (template learning + meeting phase dominate) ==")
    for size in (int(s) for s in args.sizes.split(",")):
        bench_engine(size)
    print("== descriptor best-match similarity ==")
    for items, descriptors in ((40, 20), (80, 40)):
        bench_hamming(items, descriptors)


if __name__ == "__main__":
    main()
