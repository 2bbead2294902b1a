"""Dominance relations, epsilon-dominance and dominance-depth ranking.

All comparisons use minimization: a smaller aggregated mobility value means a
larger mobility reduction, which is better.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .aggregate import ObjectiveVector
from .ingest import LocalityKey


class DominanceRelation(enum.Enum):
    """Relation of the first vector to the second.

    ``DOMINATED_BY`` and ``STRICTLY_DOMINATED_BY`` are the mirror images of
    ``DOMINATES`` and ``STRICTLY_DOMINATES`` so that ``compare(b, a)`` is
    always the converse of ``compare(a, b)``.
    """

    STRICTLY_DOMINATES = "strictly_dominates"
    DOMINATES = "dominates"
    WEAKLY_DOMINATES = "weakly_dominates"
    INDIFFERENT = "indifferent"
    INCOMPARABLE = "incomparable"
    DOMINATED_BY = "dominated_by"
    STRICTLY_DOMINATED_BY = "strictly_dominated_by"

    @property
    def dominates(self) -> bool:
        return self in (DominanceRelation.STRICTLY_DOMINATES, DominanceRelation.DOMINATES)

    @property
    def strictly_dominates(self) -> bool:
        return self is DominanceRelation.STRICTLY_DOMINATES

    @property
    def weakly_dominates(self) -> bool:
        return self.dominates or self in (DominanceRelation.WEAKLY_DOMINATES,
                                          DominanceRelation.INDIFFERENT)

    def converse(self) -> DominanceRelation:
        return _CONVERSE.get(self, self)


_CONVERSE = {
    DominanceRelation.STRICTLY_DOMINATES: DominanceRelation.STRICTLY_DOMINATED_BY,
    DominanceRelation.DOMINATES: DominanceRelation.DOMINATED_BY,
    DominanceRelation.STRICTLY_DOMINATED_BY: DominanceRelation.STRICTLY_DOMINATES,
    DominanceRelation.DOMINATED_BY: DominanceRelation.DOMINATES,
}


class DimensionError(ValueError):
    pass


class NegativeComponentError(ValueError):
    pass


def _seq(v) -> tuple[float, ...]:
    if isinstance(v, ObjectiveVector):
        return v.components
    if isinstance(v, np.ndarray):
        return tuple(v.tolist())
    return tuple(v)


def _pair(a, b) -> tuple[tuple[float, ...], tuple[float, ...]]:
    a, b = _seq(a), _seq(b)
    if len(a) != len(b):
        raise DimensionError(f"cannot compare vectors of lengths {len(a)} and {len(b)}")
    return a, b


def pareto_compare(a, b) -> DominanceRelation:
    a, b = _pair(a, b)
    less = greater = equal = 0
    for x, y in zip(a, b):
        if x < y:
            less += 1
        elif x > y:
            greater += 1
        else:
            equal += 1
    if less and greater:
        return DominanceRelation.INCOMPARABLE
    if less:
        return DominanceRelation.STRICTLY_DOMINATES if not equal else DominanceRelation.DOMINATES
    if greater:
        return DominanceRelation.STRICTLY_DOMINATED_BY if not equal else DominanceRelation.DOMINATED_BY
    return DominanceRelation.INDIFFERENT


def weakly_dominates(a, b) -> bool:
    a, b = _pair(a, b)
    return all(x <= y for x, y in zip(a, b))


def eps_dominates(a, b, epsilon: float, additive: bool = False) -> bool:
    """Whether ``a`` epsilon-dominates ``b``: ``a_i <= (1 + eps) * b_i`` for all i.

    ``additive=True`` uses ``a_i <= b_i + eps`` instead; that form needs no
    sign restriction.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    a, b = _pair(a, b)
    if additive:
        return all(x <= y + epsilon for x, y in zip(a, b))
    if any(x < 0 for x in a) or any(y < 0 for y in b):
        raise NegativeComponentError("multiplicative epsilon-dominance needs non-negative vectors")
    return all(x <= (1.0 + epsilon) * y for x, y in zip(a, b))


def nonneg_lift(vectors: Sequence[ObjectiveVector]) -> tuple[list[ObjectiveVector], float]:
    """Shift every component by one scalar so the set has no negative value."""
    vectors = list(vectors)
    if not vectors:
        return vectors, 0.0
    low = min(min(v.components) for v in vectors)
    if low >= 0:
        return vectors, 0.0
    lift = -low
    return [replace(v, components=tuple(c + lift for c in v.components)) for v in vectors], lift


def mean_scalarize(v) -> float:
    x = _seq(v)
    if not x:
        raise ValueError("empty vector")
    return float(np.mean(x))


COMPARATOR_KINDS = ("pareto", "epsilon", "mean_scalarized")


@dataclass(frozen=True)
class Comparator:
    kind: str = "pareto"
    epsilon: float | None = None
    additive: bool = False

    def __post_init__(self):
        if self.kind not in COMPARATOR_KINDS:
            raise ValueError(f"unknown comparator {self.kind!r}")
        if self.kind == "epsilon" and not (self.epsilon is not None and self.epsilon > 0):
            raise ValueError("epsilon comparator needs epsilon > 0")

    @property
    def label(self) -> str:
        if self.kind == "epsilon":
            return f"epsilon{'_add' if self.additive else ''}={self.epsilon:g}"
        return self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "epsilon": self.epsilon, "additive": self.additive}


def sort_dominates(a, b, comparator: Comparator) -> bool:
    """Asymmetric dominance used for front peeling.

    Mutual epsilon-dominance counts as indifference.
    """
    if comparator.kind == "pareto":
        return pareto_compare(a, b).dominates
    if comparator.kind == "epsilon":
        e, add = comparator.epsilon, comparator.additive
        return eps_dominates(a, b, e, add) and not eps_dominates(b, a, e, add)
    return mean_scalarize(a) < mean_scalarize(b)


class DominanceCycleWarning(UserWarning):
    pass


def nondominated_sort(vectors: Sequence, comparator: Comparator = Comparator()) -> tuple[list[int], bool]:
    """Dominance depth of each vector by repeated front peeling.

    Returns ``(depths, cycle)``. If some round finds every remaining vector
    dominated (only possible under epsilon-dominance), the remainder shares
    the current depth, ``cycle`` is True and a warning is emitted.
    """
    n = len(vectors)
    if n == 0:
        raise ValueError("nothing to sort")
    dom = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j:
                dom[i, j] = sort_dominates(vectors[i], vectors[j], comparator)
    depths = [0] * n
    remaining = list(range(n))
    depth, cycle = 1, False
    while remaining:
        front = [j for j in remaining if not any(dom[i, j] for i in remaining)]
        if not front:
            cycle = True
            warnings.warn(f"dominance cycle among {len(remaining)} vectors under {comparator.label}; "
                          f"assigning depth {depth} to all", DominanceCycleWarning, stacklevel=2)
            front = remaining
        for j in front:
            depths[j] = depth
        remaining = [j for j in remaining if j not in front]
        depth += 1
    return depths, cycle


@dataclass
class DepthRanking:
    """Dominance depth of each locality, per period."""

    periods: list[dict[LocalityKey, int]]
    comparator: Comparator
    provenance: dict = field(default_factory=dict)
    cycles: list[int] = field(default_factory=list)

    def depth(self, key: LocalityKey, period: int = 0) -> int:
        return self.periods[period][key]

    def clusters(self, period: int = 0) -> list[set[LocalityKey]]:
        by_depth: dict[int, set[LocalityKey]] = {}
        for k, d in self.periods[period].items():
            by_depth.setdefault(d, set()).add(k)
        return [by_depth[d] for d in sorted(by_depth)]

    def to_dict(self) -> dict:
        return {
            "comparator": self.comparator.to_dict(),
            "periods": [{k.ident: d for k, d in p.items()} for p in self.periods],
            "cycles": self.cycles,
            "provenance": self.provenance,
        }


def rank_run(vectors_per_period: Sequence[Sequence[ObjectiveVector]], comparator: Comparator,
             provenance: dict | None = None) -> DepthRanking:
    """Sort each period independently.

    Under epsilon comparison the vectors of each period are lifted to be
    non-negative first; the lift is recorded in the provenance.
    """
    keys = [v.key for v in vectors_per_period[0]] if vectors_per_period else []
    prov = dict(provenance or {})
    lifts, periods, cycles = [], [], []
    for p, vecs in enumerate(vectors_per_period):
        if [v.key for v in vecs] != keys:
            raise ValueError(f"period {p} has a different locality set")
        lift = 0.0
        if comparator.kind == "epsilon" and not comparator.additive:
            vecs, lift = nonneg_lift(vecs)
        lifts.append(lift)
        depths, cycle = nondominated_sort(vecs, comparator)
        if cycle:
            cycles.append(p)
        periods.append(dict(zip(keys, depths)))
    if comparator.kind == "epsilon":
        prov["nonneg_lift"] = lifts
    return DepthRanking(periods, comparator, prov, cycles)
