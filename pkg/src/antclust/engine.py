"""The clustering engine: five phases run under one seeded generator.

1. initialize one ant per dataset item
2. template learning: each ant meets ``min(N-1, max(1, round(beta*N)))``
   random partners (uniform with replacement, self excluded); both sides
   record each similarity, no rules fire
3. meeting phase: ``round(0.5 * iter_alpha * N)`` uniformly drawn pairs of
   distinct ants; both record the similarity, acceptance is evaluated on the
   updated templates, then the rule set is applied
4. nest shrink: colonies whose fitness (size share times mean integration
   estimator) falls below ``shrink_threshold`` times the mean colony fitness
   are dissolved
5. reassignment: every unlabeled ant joins the colony of the labeled ant
   most similar to it

Determinism contract: all randomness comes from numpy's PCG64 seeded with
``Parameters.seed``. The draw schedule is fixed: one ``integers`` call of
shape (N, k) for phase-2 partners, then two ``integers`` calls of length T
for the phase-3 pairs (partner/index collisions are skipped by drawing from
N-1 values and shifting). Equal seeds therefore give bit-identical results,
on either backend: the compiled kernels consume the same pre-drawn indices
and perform the same double-precision operations as the pure path.

The full pairwise similarity matrix is precomputed up front (similarity is
pure), so a run needs O(N^2) memory; intended scale is desk-sized datasets
of up to a few thousand items.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels, use_compiled
from .core_model import (
    Ant,
    ClusteringResult,
    Parameters,
    init_ant,
    record_meeting_observation,
    validate_ant,
)
from .errors import ConfigError
from .rules import (
    LABROCHE_RULES,
    LabelAllocator,
    MeetingContext,
    Rule,
    acceptance,
    apply_rule_set,
)
from .similarity import MatrixColumn, SimilarityMatrix, similarity_matrix


def _round_half_up(x: float) -> int:
    # the meeting-count formulas round halves up, not to even
    return math.floor(x + 0.5)


def template_meetings_per_ant(n: int, beta: float) -> int:
    """Phase-2 meetings each ant initiates: ``min(N-1, max(1, round(beta*N)))``."""
    return min(n - 1, max(1, _round_half_up(beta * n)))


def meeting_phase_iterations(n: int, iter_alpha: float) -> int:
    """Phase-3 meeting count: ``round(0.5 * iter_alpha * N)``."""
    return _round_half_up(0.5 * iter_alpha * n)


def draw_meeting_pairs(rng: np.random.Generator, n: int, count: int):
    """Draw ``count`` ordered pairs of distinct indices, uniform over pairs."""
    first = rng.integers(0, n, size=count)
    second = rng.integers(0, n - 1, size=count)
    second += second >= first
    return first, second


def _draw_template_partners(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    partners = rng.integers(0, n - 1, size=(n, k))
    partners += partners >= np.arange(n)[:, None]
    return partners


@dataclass
class EngineState:
    """Everything one run mutates; ants are the single source of truth."""

    ants: list[Ant]
    sim_matrix: np.ndarray
    params: Parameters
    rng: np.random.Generator
    allocator: LabelAllocator = field(default_factory=LabelAllocator)
    rule_set: tuple[Rule, ...] = LABROCHE_RULES
    backend: str | None = None
    meetings_executed: int = 0

    def validate(self) -> None:
        """Debug sweep: every ant invariant, and labels traceable to the allocator."""
        for ant in self.ants:
            validate_ant(ant)
            if ant.label is not None and not 0 <= ant.label < self.allocator.issued:
                raise AssertionError(f"label {ant.label} was never issued")


def prepare_state(
    dataset,
    params: Parameters | None = None,
    rule_set=None,
    backend: str | None = None,
) -> EngineState:
    """Build the initial state (phase 1) for a dataset.

    ``dataset`` may be a single feature column, a sequence of feature
    columns, or a validated SimilarityMatrix.
    """
    if params is None:
        params = Parameters()
    if isinstance(dataset, np.ndarray):
        raise ConfigError(
            "raw arrays are ambiguous; wrap values in ScalarColumn or validate a "
            "similarity matrix with SimilarityMatrix.from_array"
        )
    if isinstance(dataset, SimilarityMatrix):
        columns = [MatrixColumn(dataset)]
    elif hasattr(dataset, "sim"):
        columns = [dataset]
    else:
        columns = list(dataset)
    if not columns:
        raise ConfigError("dataset must contain at least one feature column")
    sim = similarity_matrix(columns, backend)
    n = sim.shape[0]
    if n < 1:
        raise ConfigError("dataset must not be empty")
    return EngineState(
        ants=[init_ant(i) for i in range(n)],
        sim_matrix=sim,
        params=params,
        rng=np.random.Generator(np.random.PCG64(params.seed)),
        rule_set=LABROCHE_RULES if rule_set is None else tuple(rule_set),
        backend=backend,
    )


# --------------------------------------------------------------------------
# packing ant state into flat arrays for the compiled kernels


def _pack_stats(ants):
    n = len(ants)
    stats = {
        "sim_max": np.empty(n, np.float64),
        "sim_mean": np.empty(n, np.float64),
        "template": np.empty(n, np.float64),
        "meeting_count": np.empty(n, np.int64),
        "age": np.empty(n, np.int64),
    }
    for i, ant in enumerate(ants):
        stats["sim_max"][i] = ant.sim_max
        stats["sim_mean"][i] = ant.sim_mean
        stats["template"][i] = ant.template
        stats["meeting_count"][i] = ant.meeting_count
        stats["age"][i] = ant.age
    return stats


def _unpack_stats(ants, stats) -> None:
    for i, ant in enumerate(ants):
        ant.sim_max = float(stats["sim_max"][i])
        ant.sim_mean = float(stats["sim_mean"][i])
        ant.template = float(stats["template"][i])
        ant.meeting_count = int(stats["meeting_count"][i])
        ant.age = int(stats["age"][i])


def _pack_full(ants):
    n = len(ants)
    full = _pack_stats(ants)
    full["labels"] = np.empty(n, np.int64)
    full["m"] = np.empty(n, np.float64)
    full["m_plus"] = np.empty(n, np.float64)
    for i, ant in enumerate(ants):
        full["labels"][i] = -1 if ant.label is None else ant.label
        full["m"][i] = ant.m
        full["m_plus"][i] = ant.m_plus
    return full


def _unpack_full(ants, full) -> None:
    _unpack_stats(ants, full)
    for i, ant in enumerate(ants):
        label = int(full["labels"][i])
        ant.label = None if label < 0 else label
        ant.m = float(full["m"][i])
        ant.m_plus = float(full["m_plus"][i])


# --------------------------------------------------------------------------
# phases


def learn_templates(state: EngineState) -> EngineState:
    """Phase 2: seed every ant's template from random encounters."""
    n = len(state.ants)
    if n < 2:
        return state
    k = template_meetings_per_ant(n, state.params.beta)
    partners = _draw_template_partners(state.rng, n, k)
    if use_compiled(state.backend):
        stats = _pack_stats(state.ants)
        kernels().learn_templates(
            state.sim_matrix,
            partners,
            stats["sim_max"],
            stats["sim_mean"],
            stats["template"],
            stats["meeting_count"],
            stats["age"],
        )
        _unpack_stats(state.ants, stats)
        return state
    ants = state.ants
    sim = state.sim_matrix
    for a in range(n):
        row = partners[a]
        sims = sim[a, row].tolist()
        ant_a = ants[a]
        for p, s in zip(row.tolist(), sims):
            record_meeting_observation(ant_a, s)
            record_meeting_observation(ants[p], s)
    return state


def meeting_phase(state: EngineState) -> EngineState:
    """Phase 3: random meetings drive the rule set."""
    n = len(state.ants)
    if n < 2:
        return state
    count = meeting_phase_iterations(n, state.params.iter_alpha)
    first, second = draw_meeting_pairs(state.rng, n, count)
    if use_compiled(state.backend) and state.rule_set is LABROCHE_RULES:
        full = _pack_full(state.ants)
        next_label = kernels().labroche_meeting_phase(
            state.sim_matrix,
            first,
            second,
            full["labels"],
            full["m"],
            full["m_plus"],
            full["sim_max"],
            full["sim_mean"],
            full["template"],
            full["meeting_count"],
            full["age"],
            state.params.update_alpha,
            state.allocator.issued,
        )
        _unpack_full(state.ants, full)
        state.allocator.advance_to(int(next_label))
        state.meetings_executed += count
        return state
    ants = state.ants
    sims = state.sim_matrix[first, second].tolist()
    alpha = state.params.update_alpha
    for i, j, s in zip(first.tolist(), second.tolist(), sims):
        ant_i = ants[i]
        ant_j = ants[j]
        record_meeting_observation(ant_i, s)
        record_meeting_observation(ant_j, s)
        accepted = acceptance(ant_i.template, ant_j.template, s)
        ctx = MeetingContext(ant_i, ant_j, s, accepted, state.allocator, alpha)
        apply_rule_set(ctx, state.rule_set)
    state.meetings_executed += count
    return state


def colony_fitness(state: EngineState) -> dict[int, float]:
    """Fitness per colony: (size / N) times the mean integration estimator."""
    n = len(state.ants)
    sizes: dict[int, int] = {}
    sums: dict[int, float] = {}
    for ant in state.ants:
        if ant.label is None:
            continue
        sizes[ant.label] = sizes.get(ant.label, 0) + 1
        sums[ant.label] = sums.get(ant.label, 0.0) + ant.m_plus
    return {c: (sizes[c] / n) * (sums[c] / sizes[c]) for c in sorted(sizes)}


def nest_shrink(state: EngineState) -> EngineState:
    """Phase 4: dissolve colonies whose fitness falls below the relative cut."""
    fitness = colony_fitness(state)
    if not fitness:
        return state
    mean_fitness = sum(fitness[c] for c in sorted(fitness)) / len(fitness)
    cut = state.params.shrink_threshold * mean_fitness
    doomed = {c for c, f in fitness.items() if f < cut}
    if doomed:
        for ant in state.ants:
            if ant.label in doomed:
                ant.label = None
                ant.m_plus = 0.0
    return state


def reassign_unlabeled(state: EngineState) -> EngineState:
    """Phase 5: homeless ants join their most similar labeled ant's colony.

    Membership is decided against a snapshot of the labeled ants taken at
    phase entry, so the outcome does not depend on iteration order. Ties go
    to the lowest index. With no labeled ant at all, everything becomes one
    fresh colony.
    """
    ants = state.ants
    labeled = [i for i, ant in enumerate(ants) if ant.label is not None]
    unlabeled = [i for i, ant in enumerate(ants) if ant.label is None]
    if not unlabeled:
        return state
    if not labeled:
        fresh = state.allocator.next()
        for ant in ants:
            ant.label = fresh
        return state
    labeled_arr = np.asarray(labeled)
    for u in unlabeled:
        row = state.sim_matrix[u, labeled_arr]
        ants[u].label = ants[labeled[int(np.argmax(row))]].label
    return state


def finalize(state: EngineState) -> ClusteringResult:
    """Renumber labels densely from 0 in first-appearance order."""
    mapping: dict[int, int] = {}
    labels = [mapping.setdefault(ant.label, len(mapping)) for ant in state.ants]
    return ClusteringResult(
        labels=tuple(labels),
        colony_count=len(mapping),
        seed_used=state.params.seed,
    )


def run_antclust(
    dataset,
    params: Parameters | None = None,
    rule_set=None,
    backend: str | None = None,
) -> ClusteringResult:
    """Run all five phases on a dataset and return the partition."""
    state = prepare_state(dataset, params, rule_set, backend)
    learn_templates(state)
    meeting_phase(state)
    nest_shrink(state)
    reassign_unlabeled(state)
    return finalize(state)
