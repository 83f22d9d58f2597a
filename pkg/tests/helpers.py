"""Independent oracles the tests check the package against.

These deliberately take different routes than the implementations: pair
counting instead of contingency tables, byte-level bit counting instead of
the Hamming kernels, transitive closure instead of BFS.
"""

from __future__ import annotations

import numpy as np


def ari_pair_oracle(truth, predicted) -> float:
    """ARI via brute-force counting of the four pair-agreement classes."""
    t = np.asarray(truth)
    p = np.asarray(predicted)
    n = len(t)
    same_t = t[:, None] == t[None, :]
    same_p = p[:, None] == p[None, :]
    iu = np.triu_indices(n, 1)
    st = same_t[iu]
    sp = same_p[iu]
    a = int(np.count_nonzero(st & sp))
    b = int(np.count_nonzero(st & ~sp))
    c = int(np.count_nonzero(~st & sp))
    d = int(np.count_nonzero(~st & ~sp))
    denominator = (a + b) * (b + d) + (a + c) * (c + d)
    if denominator == 0:
        return 1.0 if b == 0 and c == 0 else 0.0
    return 2 * (a * d - b * c) / denominator


def min_hamming_oracle(set_a, set_b) -> int:
    """Best-match distance by an explicit double loop over byte strings."""
    best = None
    for p in set_a.descriptors:
        for q in set_b.descriptors:
            dist = sum((x ^ y).bit_count() for x, y in zip(p, q))
            if best is None or dist < best:
                best = dist
    return best


def dbscan_closure_oracle(dist, eps, min_samples):
    """Reachability by transitive closure of the core-core graph.

    Returns (core mask, co-membership matrix over clustered points, noise
    mask); border points attach to their nearest core point.
    """
    d = np.asarray(dist, dtype=np.float64)
    n = d.shape[0]
    within = d <= eps
    core = within.sum(axis=1) >= min_samples
    reach = within & core[None, :] & core[:, None]
    np.fill_diagonal(reach, core)
    closure = reach.copy()
    for _ in range(n):
        hop = (closure.astype(np.uint8) @ closure.astype(np.uint8)) > 0
        new = closure | hop
        if np.array_equal(new, closure):
            break
        closure = new
    member_of = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        if core[i]:
            member_of[i] = i  # representative: itself, component resolved via closure
    for i in range(n):
        if not core[i]:
            cores_near = np.nonzero(within[i] & core)[0]
            if cores_near.size:
                member_of[i] = cores_near[np.argmin(d[i, cores_near])]
    clustered = member_of >= 0
    co = np.zeros((n, n), dtype=bool)
    idx = np.nonzero(clustered)[0]
    for i in idx:
        for j in idx:
            co[i, j] = closure[member_of[i], member_of[j]] or member_of[i] == member_of[j]
    return core, co, ~clustered


def co_membership(labels, noise_label=None) -> np.ndarray:
    """Pairwise same-cluster matrix; noise points co-belong with nobody,
    themselves included (matching dbscan_closure_oracle's convention)."""
    lab = np.asarray(labels)
    co = lab[:, None] == lab[None, :]
    if noise_label is not None:
        noise = lab == noise_label
        co[noise, :] = False
        co[:, noise] = False
    return co
