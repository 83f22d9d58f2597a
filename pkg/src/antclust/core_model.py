"""Ant agents, their per-meeting statistics, and run parameters.

An ant wraps one dataset item (its "genetic") together with the recognition
state the meeting rules operate on: a colony label, two estimators ``m``
(meeting success / colony size signal) and ``m_plus`` (colony integration),
the running mean and maximum of all similarities it has observed, and the
acceptance template derived from them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, SimilarityRangeError


@dataclass
class Ant:
    """One agent. All real-valued statistics stay inside [0, 1].

    ``label`` is ``None`` while the ant belongs to no colony. Concrete colony
    identifiers are handed out by the engine's label allocator, never made up
    ad hoc, so "no colony" can never collide with a real colony id.
    """

    genetic_index: int
    label: int | None = None
    age: int = 0
    m: float = 0.0
    m_plus: float = 0.0
    sim_max: float = 0.0
    sim_mean: float = 0.0
    template: float = 0.0
    meeting_count: int = 0


@dataclass(frozen=True)
class Parameters:
    """Run parameters.

    ``update_alpha`` is the estimator learning rate, ``iter_alpha`` the
    meeting-phase iteration coefficient (total rule-phase meetings are
    ``round(0.5 * iter_alpha * N)``), and ``beta`` scales the number of
    template-learning meetings per ant. The two alphas are distinct knobs.
    """

    update_alpha: float = 0.2
    iter_alpha: float = 150.0
    beta: float = 0.9
    shrink_threshold: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.update_alpha < 1.0:
            raise ConfigError(f"update_alpha must be in (0, 1), got {self.update_alpha}")
        if self.iter_alpha <= 0.0:
            raise ConfigError(f"iter_alpha must be positive, got {self.iter_alpha}")
        if self.beta <= 0.0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if not 0.0 < self.shrink_threshold <= 1.0:
            raise ConfigError(
                f"shrink_threshold must be in (0, 1], got {self.shrink_threshold}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class ClusteringResult:
    """Final partition: one dense label per item, labels numbered from 0."""

    labels: tuple[int, ...]
    colony_count: int
    seed_used: int


def init_ant(genetic_index: int) -> Ant:
    """Create a fresh ant for the item at ``genetic_index``: no colony, all zeros."""
    if genetic_index < 0:
        raise ConfigError(f"genetic_index must be non-negative, got {genetic_index}")
    return Ant(genetic_index=genetic_index)


def record_meeting_observation(ant: Ant, sim: float) -> Ant:
    """Fold one observed similarity into the ant's running statistics.

    Increments the meeting counter and age, updates the running maximum and
    the incremental mean, and recomputes the template as the midpoint of the
    two. The incremental mean keeps memory O(1) per ant; it equals the
    arithmetic mean of everything observed so far.
    """
    if not 0.0 <= sim <= 1.0:
        raise SimilarityRangeError(f"similarity must be in [0, 1], got {sim}")
    ant.meeting_count += 1
    ant.age += 1
    if sim > ant.sim_max:
        ant.sim_max = sim
    ant.sim_mean += (sim - ant.sim_mean) / ant.meeting_count
    ant.template = (ant.sim_mean + ant.sim_max) / 2.0
    return ant


def validate_ant(ant: Ant) -> None:
    """Assert the ant's invariants; used by the engine's debug sweeps."""
    for name in ("m", "m_plus", "sim_max", "sim_mean", "template"):
        value = getattr(ant, name)
        if not 0.0 <= value <= 1.0:
            raise AssertionError(f"ant {ant.genetic_index}: {name}={value} outside [0, 1]")
    if ant.age < 0 or ant.meeting_count < 0:
        raise AssertionError(f"ant {ant.genetic_index}: negative counters")
    if ant.meeting_count > 0:
        if ant.sim_mean > ant.sim_max + 1e-12:
            raise AssertionError(
                f"ant {ant.genetic_index}: sim_mean {ant.sim_mean} > sim_max {ant.sim_max}"
            )
        expected = (ant.sim_mean + ant.sim_max) / 2.0
        if ant.template != expected:
            raise AssertionError(
                f"ant {ant.genetic_index}: template {ant.template} != {expected}"
            )
