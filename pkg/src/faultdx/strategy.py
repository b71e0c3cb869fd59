"""Test-selection strategy: exclusive-power fixpoint, hypothesis partitioning,
minority ratio, binary entropy, and locally optimal test choice.

The partition a test induces on the hypothesis space mirrors graph dominance:
a gate belongs to the "inside" half iff every path its output can take ends at
the tested point, so injecting power there masks its fault. The expected
information gain of a test is the binary entropy of the minority-partition
ratio; the locally optimal test maximizes the size of the smaller partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Union

from faultdx.circuit import Circuit, Node, NodeId, Outcome, circuit_group
from faultdx.errors import ContradictoryEvidenceError, StrategyError

HypothesisSet = FrozenSet[NodeId]


@dataclass(frozen=True)
class TestEvaluation:
    """Outcome partition and information gain of a single candidate test."""

    test: str
    inside: HypothesisSet  # eliminated-or-confirmed together when the sink lights
    outside: HypothesisSet
    excluded: HypothesisSet  # hypotheses outside the tested sub-circuit
    minority_ratio: float
    entropy: float

    @property
    def sizes(self) -> tuple[int, int]:
        return (len(self.inside), len(self.outside))


def exclusive_power_set(c: Circuit, point: Node) -> frozenset[NodeId]:
    """All gates whose every outgoing path leads to ``point``.

    Least fixed point of: g belongs iff g != point, g lies in point's
    sub-circuit (no restriction when point is a sink), g has at least one
    out-edge, and every out-edge of g targets point or an already-included
    gate. Matches the iterative "repeat until no more gates to add"
    construction.
    """
    cached = c._exclusive_cache.get(point)
    if cached is not None:
        return cached
    if isinstance(point, int):
        if point not in c.gates:
            raise StrategyError(f"unknown point {point}")
        candidates = {
            g for g in c.gates if g != point and circuit_group(g) == circuit_group(point)
        }
    else:
        if point not in c.sinks:
            raise StrategyError(f"unknown point {point!r}")
        candidates = set(c.gates)

    members: set[NodeId] = set()
    changed = True
    while changed:
        changed = False
        for g in sorted(candidates - members):
            outs = c.children[g]
            if outs and all(t == point or t in members for t in outs):
                members.add(g)
                changed = True
    result = frozenset(members)
    c._exclusive_cache[point] = result
    return result


def partition(
    c: Circuit, test: str, v: Iterable[NodeId]
) -> tuple[HypothesisSet, HypothesisSet, HypothesisSet]:
    """Split hypotheses by a test: (inside, outside, excluded).

    ``inside`` holds hypotheses masked by injecting at the test (the tested
    gate itself plus its exclusive-power set); ``outside`` the rest of the
    tested sub-circuit; ``excluded`` hypotheses from other sub-circuits, which
    the test cannot touch.
    """
    gate = c.gate_for_label(test)
    v = frozenset(v)
    group = circuit_group(gate)
    in_group = frozenset(h for h in v if h in c.gates and circuit_group(h) == group)
    excluded = v - in_group
    inside = in_group & (exclusive_power_set(c, gate) | {gate})
    outside = in_group - inside
    return inside, outside, excluded


def minority_ratio(inside: int, outside: int) -> float:
    """min(inside, outside) / (inside + outside), in [0, 0.5]."""
    total = inside + outside
    if total < 1:
        raise StrategyError("empty hypothesis set")
    return min(inside, outside) / total


def binary_entropy(p: float) -> float:
    """H_b(p) = -p*log2(p) - (1-p)*log2(1-p), with 0*log2(0) = 0."""
    if not 0.0 <= p <= 1.0:
        raise StrategyError(f"probability {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def evaluate_test(c: Circuit, test: str, v: Iterable[NodeId]) -> TestEvaluation:
    """Partition, minority ratio and entropy of one candidate test."""
    inside, outside, excluded = partition(c, test, v)
    p = minority_ratio(len(inside), len(outside))
    return TestEvaluation(
        test=test,
        inside=inside,
        outside=outside,
        excluded=excluded,
        minority_ratio=p,
        entropy=binary_entropy(p),
    )


def candidate_tests(c: Circuit, v: Iterable[NodeId]) -> list[str]:
    """Test labels in the hypotheses' sub-circuits, ascending by label."""
    groups = {circuit_group(h) for h in v}
    return sorted(
        label
        for g, label in c.test_points.items()
        if circuit_group(g) in groups
    )


def optimal_test(c: Circuit, v: Iterable[NodeId]) -> tuple[str, tuple[int, int]]:
    """Test maximizing the smaller partition size; ties go to the first label
    in ascending lexicographic order."""
    v = frozenset(v)
    if not v:
        raise StrategyError("empty hypothesis set")
    best: tuple[str, tuple[int, int]] | None = None
    best_min = -1
    for label in candidate_tests(c, v):
        inside, outside, _ = partition(c, label, v)
        sizes = (len(inside), len(outside))
        if min(sizes) > best_min:
            best = (label, sizes)
            best_min = min(sizes)
    if best is None:
        raise StrategyError("no test points available for the hypothesis set")
    return best


def prune(
    v: Iterable[NodeId], evaluation: TestEvaluation, outcome: Outcome
) -> HypothesisSet:
    """Survivors after observing ``outcome``: LIT keeps inside, UNLIT outside.

    Zero-likelihood hypotheses are removed; the survivors are exactly the
    maximum a-posteriori set under uniform priors.
    """
    v = frozenset(v)
    survivors = (
        evaluation.inside if outcome is Outcome.LIT else evaluation.outside
    ) & v
    if not survivors:
        raise ContradictoryEvidenceError(
            f"contradictory evidence: {outcome.value} at {evaluation.test!r} "
            f"eliminates every hypothesis"
        )
    return survivors
