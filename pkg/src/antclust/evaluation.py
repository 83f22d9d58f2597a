"""Evaluation harness: synthetic datasets, ARI scoring, DBSCAN baseline, grids.

The float benchmark plants clusters around integer pivots 1..n with uniform
noise in [-0.1, 0.1]. The descriptor benchmark plants clusters of fixed-width
binary descriptors whose pairwise Hamming distances are bounded inside and
between clusters, exercising the same code path as real image descriptors.
Grid cells derive their seeds from (base seed, clusters, tuples, repetition)
through numpy's SeedSequence, so any cell reproduces in isolation.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core_model import Parameters
from .engine import run_antclust
from .errors import ConfigError, DataError
from .similarity import DescriptorColumn, DescriptorSet, ScalarColumn, normalize_scalar_features

DBSCAN_NOISE = -1


# --------------------------------------------------------------------------
# adjusted rand index


def adjusted_rand_index(truth, predicted) -> float:
    """Chance-corrected agreement of two partitions, in [-1, 1].

    Uses the contingency-table formula, rescaled to a single integer ratio so
    the only rounding happens in the final division. When the correction term
    degenerates (both partitions trivial), returns 1.0 for identical
    pair-sets and 0.0 otherwise.
    """
    t = np.asarray(truth)
    p = np.asarray(predicted)
    if t.ndim != 1 or p.ndim != 1 or t.shape[0] != p.shape[0]:
        raise DataError(
            f"label sequences must be 1-D and equally long, got {t.shape} vs {p.shape}"
        )
    n = int(t.shape[0])
    if n < 2:
        raise DataError("ARI needs at least 2 items")
    _, ti = np.unique(t, return_inverse=True)
    _, pi = np.unique(p, return_inverse=True)
    contingency = np.zeros((int(ti.max()) + 1, int(pi.max()) + 1), dtype=np.int64)
    np.add.at(contingency, (ti, pi), 1)

    def pairs(counts: np.ndarray) -> int:
        return int((counts * (counts - 1) // 2).sum())

    index = pairs(contingency)
    sum_a = pairs(contingency.sum(axis=1))
    sum_b = pairs(contingency.sum(axis=0))
    total = n * (n - 1) // 2
    numerator = 2 * (total * index - sum_a * sum_b)
    denominator = total * (sum_a + sum_b) - 2 * sum_a * sum_b
    if denominator == 0:
        return 1.0 if index == sum_a == sum_b else 0.0
    return numerator / denominator


# --------------------------------------------------------------------------
# synthetic datasets


@dataclass
class LabeledDataset:
    """Feature columns plus ground truth; ``raw_values`` keeps the
    unnormalized scalars for CSV export when the task is scalar."""

    columns: list
    truth: np.ndarray
    raw_values: np.ndarray | None = None

    def __post_init__(self) -> None:
        if len(self.truth) != len(self.columns[0]):
            raise DataError("ground truth length must equal the item count")


def generate_float_dataset(
    n_clusters: int, per_cluster: int, rng: np.random.Generator
) -> LabeledDataset:
    """Plant ``n_clusters`` scalar clusters around pivots 1..n, noise ±0.1."""
    if n_clusters < 1 or per_cluster < 1:
        raise ConfigError("n_clusters and per_cluster must be positive")
    pivots = np.repeat(np.arange(1, n_clusters + 1, dtype=np.float64), per_cluster)
    values = pivots + rng.uniform(-0.1, 0.1, size=pivots.size)
    truth = np.repeat(np.arange(n_clusters), per_cluster)
    column = normalize_scalar_features(ScalarColumn(values))
    return LabeledDataset(columns=[column], truth=truth, raw_values=values)


def _walsh_codewords(n_clusters: int, total_bits: int) -> np.ndarray:
    """Cluster center offsets with pairwise Hamming distance total_bits/2.

    Walsh codes: bit b of codeword c is the parity of popcount(c & block(b)),
    blocks being equal slices of the bit string. Any two distinct codewords
    disagree on exactly half the blocks.
    """
    code_size = 2
    while code_size < n_clusters:
        code_size *= 2
    if code_size > total_bits or total_bits % code_size:
        raise ConfigError(
            f"cannot place {n_clusters} clusters in {total_bits}-bit descriptors"
        )
    block_bits = total_bits // code_size
    words = []
    for c in range(n_clusters):
        parity = np.array(
            [bin(block & c).count("1") & 1 for block in range(code_size)], dtype=np.uint8
        )
        words.append(np.packbits(np.repeat(parity, block_bits)))
    return np.stack(words)


def generate_descriptor_dataset(
    n_clusters: int,
    per_cluster: int,
    rng: np.random.Generator,
    descriptors_per_item: int = 20,
    width_bytes: int = 32,
    intra_bits: int = 32,
    inter_bits: int = 96,
) -> LabeledDataset:
    """Plant descriptor clusters with guaranteed Hamming separation.

    Within a cluster any two descriptors differ in at most ``intra_bits``
    bits; across clusters every pair differs in at least ``inter_bits``.
    Construction: cluster centers are a random base XORed with Walsh
    codewords (pairwise distance exactly half the bits), and each descriptor
    flips ``intra_bits // 2`` random bit positions of its center.
    """
    if n_clusters < 1 or per_cluster < 1 or descriptors_per_item < 1:
        raise ConfigError("cluster, item and descriptor counts must be positive")
    total_bits = 8 * width_bytes
    if n_clusters > 1 and intra_bits + inter_bits > total_bits // 2:
        raise ConfigError(
            f"separation impossible: intra {intra_bits} + inter {inter_bits} bits "
            f"exceed the center distance {total_bits // 2}"
        )
    base = rng.integers(0, 256, size=width_bytes, dtype=np.uint8)
    centers = base ^ _walsh_codewords(n_clusters, total_bits) if n_clusters > 1 else base[None, :]
    flips = intra_bits // 2
    sets = []
    for cluster in range(n_clusters):
        center = centers[cluster]
        for _ in range(per_cluster):
            descriptors = np.tile(center, (descriptors_per_item, 1))
            for d in range(descriptors_per_item):
                if flips:
                    positions = rng.choice(total_bits, size=flips, replace=False)
                    mask = np.zeros(width_bytes, dtype=np.uint8)
                    np.bitwise_xor.at(
                        mask,
                        positions >> 3,
                        (np.uint8(1) << (positions & 7).astype(np.uint8)),
                    )
                    descriptors[d] ^= mask
            sets.append(DescriptorSet(descriptors))
    truth = np.repeat(np.arange(n_clusters), per_cluster)
    return LabeledDataset(columns=[DescriptorColumn(sets)], truth=truth)


# --------------------------------------------------------------------------
# DBSCAN on a precomputed distance matrix


def distance_from_similarity(similarity_values: np.ndarray) -> np.ndarray:
    """The distance fed to density baselines: ``1 - similarity``."""
    return 1.0 - np.asarray(similarity_values, dtype=np.float64)


def dbscan_precomputed(dist, eps: float, min_samples: int) -> np.ndarray:
    """Density clustering on precomputed distances; noise is labeled -1.

    Core points have at least ``min_samples`` points (themselves included)
    within ``eps``; clusters are the connected components of core points.
    Border points join the cluster of their nearest core neighbor, which
    keeps the outcome independent of input order (up to label renaming).
    """
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DataError(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise DataError("distance matrix contains non-finite entries")
    if d.min() < 0.0:
        raise DataError("distance matrix contains negative entries")
    if np.abs(d - d.T).max() > 1e-9:
        raise DataError("distance matrix is not symmetric")
    if np.abs(np.diagonal(d)).max() > 1e-9:
        raise DataError("distance matrix has a non-zero diagonal")
    if eps < 0.0 or min_samples < 1:
        raise ConfigError("eps must be non-negative and min_samples positive")

    n = d.shape[0]
    within = d <= eps
    core = within.sum(axis=1) >= min_samples
    labels = np.full(n, DBSCAN_NOISE, dtype=np.int64)
    cluster = 0
    for start in range(n):
        if not core[start] or labels[start] != DBSCAN_NOISE:
            continue
        stack = [start]
        labels[start] = cluster
        while stack:
            v = stack.pop()
            for w in np.nonzero(within[v] & core)[0]:
                if labels[w] == DBSCAN_NOISE:
                    labels[w] = cluster
                    stack.append(int(w))
        cluster += 1
    for i in range(n):
        if core[i]:
            continue
        reachable = np.nonzero(within[i] & core)[0]
        if reachable.size:
            labels[i] = labels[reachable[np.argmin(d[i, reachable])]]
    return labels


# --------------------------------------------------------------------------
# benchmark grid


@dataclass(frozen=True)
class GridRun:
    """One engine run inside the grid."""

    clusters: int
    tuples: int
    repetition: int
    ari: float
    seed: int


@dataclass
class BenchmarkGrid:
    """Mean ARI per (cluster count, tuples per cluster) cell."""

    task: str
    cluster_counts: list[int]
    tuple_counts: list[int]
    repetitions: int
    base_seed: int
    scores: np.ndarray
    runs: list[GridRun]


def cell_seeds(base_seed: int, clusters: int, tuples: int, repetition: int) -> tuple[int, int]:
    """Derive the (dataset, engine) seeds of one grid cell."""
    sequence = np.random.SeedSequence([base_seed, clusters, tuples, repetition])
    data_seed, engine_seed = sequence.generate_state(2, np.uint64)
    return int(data_seed), int(engine_seed)


def run_grid_cell(
    task: str,
    clusters: int,
    tuples: int,
    repetition: int,
    base_seed: int,
    params: Parameters,
    backend: str | None = None,
) -> GridRun:
    """Generate one cell's dataset, cluster it, and score it against truth."""
    data_seed, engine_seed = cell_seeds(base_seed, clusters, tuples, repetition)
    rng = np.random.Generator(np.random.PCG64(data_seed))
    if task == "float":
        dataset = generate_float_dataset(clusters, tuples, rng)
    elif task == "descriptor":
        dataset = generate_descriptor_dataset(clusters, tuples, rng)
    else:
        raise ConfigError(f"unknown benchmark task {task!r}; use 'float' or 'descriptor'")
    result = run_antclust(dataset.columns, replace(params, seed=engine_seed), backend=backend)
    score = adjusted_rand_index(dataset.truth, result.labels)
    return GridRun(clusters, tuples, repetition, score, engine_seed)


def _grid_cell_worker(args) -> GridRun:
    return run_grid_cell(*args)


def benchmark_grid(
    task: str,
    cluster_counts,
    tuple_counts,
    repetitions: int,
    params: Parameters | None = None,
    base_seed: int = 0,
    jobs: int = 1,
    backend: str | None = None,
) -> BenchmarkGrid:
    """Run the full (clusters x tuples) grid, ``repetitions`` runs per cell.

    Cells are independent; ``jobs`` > 1 spreads them over a process pool
    without changing any result.
    """
    cluster_counts = [int(c) for c in cluster_counts]
    tuple_counts = [int(t) for t in tuple_counts]
    if not cluster_counts or not tuple_counts or repetitions < 1:
        raise ConfigError("grid ranges and repetitions must be non-empty")
    if min(cluster_counts) < 1 or min(tuple_counts) < 1:
        raise ConfigError("cluster and tuple counts must be positive")
    if params is None:
        params = Parameters()
    cells = [
        (task, clusters, tuples, rep, base_seed, params, backend)
        for clusters in cluster_counts
        for tuples in tuple_counts
        for rep in range(repetitions)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_grid_cell_worker, cells))
    else:
        runs = [_grid_cell_worker(cell) for cell in cells]
    scores = np.empty((len(cluster_counts), len(tuple_counts)), dtype=np.float64)
    by_cell: dict[tuple[int, int], list[float]] = {}
    for run in runs:
        by_cell.setdefault((run.clusters, run.tuples), []).append(run.ari)
    for i, clusters in enumerate(cluster_counts):
        for j, tuples in enumerate(tuple_counts):
            cell = by_cell[(clusters, tuples)]
            scores[i, j] = sum(cell) / len(cell)
    return BenchmarkGrid(task, cluster_counts, tuple_counts, repetitions, base_seed, scores, runs)


def grid_csv_text(grid: BenchmarkGrid) -> str:
    """Per-run rows; column order is part of the output contract."""
    lines = ["clusters,tuples,repetition,ari,seed"]
    for run in grid.runs:
        lines.append(f"{run.clusters},{run.tuples},{run.repetition},{run.ari!r},{run.seed}")
    return "\n".join(lines) + "\n"


def grid_json_text(grid: BenchmarkGrid) -> str:
    """Summary with the mean ARI per cell."""
    payload = {
        "task": grid.task,
        "repetitions": grid.repetitions,
        "base_seed": grid.base_seed,
        "cluster_counts": grid.cluster_counts,
        "tuple_counts": grid.tuple_counts,
        "mean_ari": [[float(v) for v in row] for row in grid.scores],
    }
    return json.dumps(payload, indent=2) + "\n"
