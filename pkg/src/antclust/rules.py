"""Meeting rules.

A rule set is an ordered sequence of (guard, action) pairs over a meeting
context; exactly the first rule whose guard holds fires. The built-in
Labroche set creates colonies when two unlabeled ants accept each other,
grows colonies by absorbing unlabeled ants, tracks colony size and
integration through the ``m`` / ``m_plus`` estimators, evicts the worse
integrated of two rejecting nestmates, and lets the ant with the smaller
size estimator defect when two accepting ants disagree on their colony.
Anything else is a no-op. Alternative rule sets plug in without touching
the engine: supply your own ordered sequence of rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .core_model import Ant


def acceptance(template_i: float, template_j: float, sim: float) -> bool:
    """True iff the similarity strictly exceeds both ants' templates."""
    return sim > template_i and sim > template_j


def estimator_increase(x: float, update_alpha: float) -> float:
    """Move an estimator towards 1: ``(1 - a) * x + a``."""
    return (1.0 - update_alpha) * x + update_alpha


def estimator_decrease(x: float, update_alpha: float) -> float:
    """Move an estimator towards 0: ``(1 - a) * x``."""
    return (1.0 - update_alpha) * x


class LabelAllocator:
    """Monotonic source of fresh colony identifiers, starting at 0."""

    def __init__(self) -> None:
        self._next = 0

    def next(self) -> int:
        label = self._next
        self._next += 1
        return label

    @property
    def issued(self) -> int:
        return self._next

    def advance_to(self, next_label: int) -> None:
        """Sync with labels handed out elsewhere (the compiled kernel)."""
        if next_label < self._next:
            raise ValueError("label allocator cannot move backwards")
        self._next = next_label


@dataclass
class MeetingContext:
    """Everything a rule may inspect or mutate during one meeting.

    ``sim`` is the pairwise similarity of the two ants' genetics for this
    meeting and ``accepted`` the acceptance predicate evaluated on their
    current templates. ``update_alpha`` is carried along so rule actions can
    apply the estimator arithmetic.
    """

    ant_i: Ant
    ant_j: Ant
    sim: float
    accepted: bool
    label_allocator: LabelAllocator
    update_alpha: float = 0.2


@dataclass(frozen=True)
class Rule:
    """One guard/action pair. Guards must not mutate the context."""

    name: str
    guard: Callable[[MeetingContext], bool]
    action: Callable[[MeetingContext], None]


def apply_rule_set(ctx: MeetingContext, rule_set) -> str | None:
    """Fire the first rule whose guard holds; returns its name (None if none)."""
    for rule in rule_set:
        if rule.guard(ctx):
            rule.action(ctx)
            return rule.name
    return None


# --------------------------------------------------------------------------
# the built-in Labroche rules


def _create_colony(ctx: MeetingContext) -> None:
    label = ctx.label_allocator.next()
    ctx.ant_i.label = label
    ctx.ant_j.label = label


def _absorb_unlabeled(ctx: MeetingContext) -> None:
    if ctx.ant_i.label is None:
        ctx.ant_i.label = ctx.ant_j.label
    else:
        ctx.ant_j.label = ctx.ant_i.label


def _reward_nestmates(ctx: MeetingContext) -> None:
    a = ctx.update_alpha
    ctx.ant_i.m = estimator_increase(ctx.ant_i.m, a)
    ctx.ant_j.m = estimator_increase(ctx.ant_j.m, a)
    ctx.ant_i.m_plus = estimator_increase(ctx.ant_i.m_plus, a)
    ctx.ant_j.m_plus = estimator_increase(ctx.ant_j.m_plus, a)


def _evict_worse_nestmate(ctx: MeetingContext) -> None:
    # Size estimators still grow (two random nestmates met), integration
    # shrinks; comparison happens after the decrease, ties evict ant_j.
    a = ctx.update_alpha
    ctx.ant_i.m = estimator_increase(ctx.ant_i.m, a)
    ctx.ant_j.m = estimator_increase(ctx.ant_j.m, a)
    ctx.ant_i.m_plus = estimator_decrease(ctx.ant_i.m_plus, a)
    ctx.ant_j.m_plus = estimator_decrease(ctx.ant_j.m_plus, a)
    loser = ctx.ant_i if ctx.ant_i.m_plus < ctx.ant_j.m_plus else ctx.ant_j
    loser.label = None
    loser.m_plus = 0.0


def _defect_to_other_colony(ctx: MeetingContext) -> None:
    # Comparison after the decrease; ties make ant_j change colony.
    a = ctx.update_alpha
    label_i = ctx.ant_i.label
    label_j = ctx.ant_j.label
    ctx.ant_i.m = estimator_decrease(ctx.ant_i.m, a)
    ctx.ant_j.m = estimator_decrease(ctx.ant_j.m, a)
    if ctx.ant_i.m < ctx.ant_j.m:
        ctx.ant_i.label = label_j
    else:
        ctx.ant_j.label = label_i


def _noop(ctx: MeetingContext) -> None:
    pass


LABROCHE_RULES: tuple[Rule, ...] = (
    Rule(
        "R1",
        lambda c: c.ant_i.label is None and c.ant_j.label is None and c.accepted,
        _create_colony,
    ),
    Rule(
        "R2",
        lambda c: (c.ant_i.label is None) != (c.ant_j.label is None) and c.accepted,
        _absorb_unlabeled,
    ),
    Rule(
        "R3",
        lambda c: c.ant_i.label is not None
        and c.ant_i.label == c.ant_j.label
        and c.accepted,
        _reward_nestmates,
    ),
    Rule(
        "R4",
        lambda c: c.ant_i.label is not None
        and c.ant_i.label == c.ant_j.label
        and not c.accepted,
        _evict_worse_nestmate,
    ),
    Rule(
        "R5",
        lambda c: c.ant_i.label is not None
        and c.ant_j.label is not None
        and c.ant_i.label != c.ant_j.label
        and c.accepted,
        _defect_to_other_colony,
    ),
    Rule("R6", lambda c: True, _noop),
)

RULE_SETS: dict[str, tuple[Rule, ...]] = {"labroche": LABROCHE_RULES}


def apply_labroche_rules(ctx: MeetingContext) -> MeetingContext:
    """Apply the built-in rule set to one meeting."""
    apply_rule_set(ctx, LABROCHE_RULES)
    return ctx
