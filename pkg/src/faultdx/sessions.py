"""Sequential diagnosis sessions, the three isomorphic trial domains,
normalized trial scoring, the random baseline, and the comprehension effect.

A trial item presents one circuit (possibly re-skinned as a waterflow network
or an ordered list) and a list of candidate first tests. Responses are scored
by the expected information gain of the chosen test, normalized so the best
presented option scores exactly 1. "I don't know" responses are excluded from
aggregates rather than scored zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from faultdx.circuit import Circuit, NodeId, Outcome, observed_outcome
from faultdx.errors import SessionError, StatsError, StrategyError
from faultdx.stats import MwuResult, mann_whitney_u
from faultdx.strategy import (
    HypothesisSet,
    TestEvaluation,
    evaluate_test,
    optimal_test,
    prune,
)

#: marker for the "I don't know" trial response
ESCAPE = "escape"


class Domain(str, enum.Enum):
    CIRCUITS = "circuits"
    WATERFLOW = "waterflow"
    LISTS = "lists"


#: presentation vocabulary per domain; the graphs themselves are isomorphic
DOMAIN_VOCABULARY = {
    Domain.CIRCUITS: {
        "source": "battery",
        "gate": "gate",
        "sink": "lightbulb",
        "test": "test point",
    },
    Domain.WATERFLOW: {
        "source": "pump",
        "gate": "junction",
        "sink": "outlet",
        "test": "pressure measurement",
    },
    Domain.LISTS: {
        "source": "start",
        "gate": "position",
        "sink": "end",
        "test": "comparison",
    },
}


def waterflow_label(label: str) -> str:
    """Default bijective relabeling of circuit test labels for the waterflow skin."""
    if "output" in label:
        return label.replace("output", "pressure")
    return f"pressure_{label}"


# --- session traces ----------------------------------------------------------

@dataclass(frozen=True)
class SessionStep:
    test: str
    outcome: Outcome
    survivors: HypothesisSet


@dataclass(frozen=True)
class SessionTrace:
    steps: tuple[SessionStep, ...]
    final: NodeId

    def __len__(self) -> int:
        return len(self.steps)


def run_session(
    c: Circuit, true_fault: NodeId, v0: Iterable[NodeId] | None = None
) -> SessionTrace:
    """Greedy diagnosis: pick the locally optimal test, observe, prune, repeat
    until one hypothesis survives. The optimal test is re-chosen on the pruned
    set each step (no lookahead)."""
    survivors: HypothesisSet = frozenset(v0) if v0 is not None else frozenset(c.gates)
    if true_fault not in survivors:
        raise SessionError(f"true fault {true_fault} not among the hypotheses")
    steps: list[SessionStep] = []
    while len(survivors) > 1:
        label, sizes = optimal_test(c, survivors)
        if min(sizes) == 0:
            raise SessionError(
                f"indistinguishable hypotheses: no test separates {sorted(survivors)}"
            )
        evaluation = evaluate_test(c, label, survivors)
        outcome = observed_outcome(c, true_fault, label)
        survivors = prune(survivors, evaluation, outcome)
        steps.append(SessionStep(test=label, outcome=outcome, survivors=survivors))
    (final,) = survivors
    return SessionTrace(steps=tuple(steps), final=final)


# --- trial items -------------------------------------------------------------

@dataclass(frozen=True)
class TrialItem:
    """One trial: a circuit, a domain skin, and the presented first-test options.

    ``options`` are labels in the domain vocabulary; ``label_map`` takes each
    option back to the underlying circuit test label. The escape option is
    always presented in addition to ``options``.
    """

    item_id: str
    domain: Domain
    circuit: Circuit
    options: tuple[str, ...]
    label_map: dict[str, str]
    hypotheses: HypothesisSet

    def __post_init__(self):
        for opt in self.options:
            if opt not in self.label_map:
                raise SessionError(f"option {opt!r} has no circuit label mapping")
            if self.label_map[opt] not in self.circuit.label_to_gate:
                raise SessionError(
                    f"option {opt!r} maps to unknown test {self.label_map[opt]!r}"
                )

    def circuit_label(self, option: str) -> str:
        return self.label_map[option]


def make_circuit_item(
    item_id: str, c: Circuit, options: Sequence[str] | None = None
) -> TrialItem:
    labels = tuple(options) if options is not None else tuple(sorted(c.test_points.values()))
    return TrialItem(
        item_id=item_id,
        domain=Domain.CIRCUITS,
        circuit=c,
        options=labels,
        label_map={l: l for l in labels},
        hypotheses=frozenset(c.gates),
    )


def map_waterflow(
    item: TrialItem, relabel: dict[str, str] | None = None
) -> TrialItem:
    """Re-skin a circuits item as the isomorphic waterflow problem.

    The graph and scoring semantics are untouched; only the vocabulary and the
    option labels change. ``relabel`` maps circuit labels to waterflow labels
    and must be a non-empty bijection over the item's options.
    """
    if relabel is None:
        relabel = {
            item.circuit_label(o): waterflow_label(item.circuit_label(o))
            for o in item.options
        }
    if not relabel:
        raise SessionError("empty relabel map")
    if len(set(relabel.values())) != len(relabel):
        raise SessionError("relabel map is not a bijection")
    missing = [o for o in item.options if item.circuit_label(o) not in relabel]
    if missing:
        raise SessionError(f"relabel map misses options {missing}")
    options = tuple(relabel[item.circuit_label(o)] for o in item.options)
    return TrialItem(
        item_id=item.item_id,
        domain=Domain.WATERFLOW,
        circuit=item.circuit,
        options=options,
        label_map={relabel[item.circuit_label(o)]: item.circuit_label(o) for o in item.options},
        hypotheses=item.hypotheses,
    )


def list_to_circuit(item_id: str, n: int) -> TrialItem:
    """Ordered-list search item as a chain circuit of n gates.

    Gate i feeds gate i+1; the last gate feeds the sink; test points sit after
    each of the first n-1 positions. Hypotheses are all n positions.
    """
    if n < 2:
        raise SessionError(f"list length {n} < 2")
    edges = [(i, i + 1) for i in range(n)] + [(n, "lightbulb")]
    labels = {i: f"after_position_{i:02d}" for i in range(1, n)}
    c = Circuit(range(1, n + 1), edges, labels)
    return TrialItem(
        item_id=item_id,
        domain=Domain.LISTS,
        circuit=c,
        options=tuple(sorted(labels.values())),
        label_map={l: l for l in labels.values()},
        hypotheses=frozenset(c.gates),
    )


# --- scoring -----------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    participant: str
    item_id: str
    choice: str  # option label or ESCAPE
    raw_entropy: Optional[float]
    normalized_score: Optional[float]  # None marks an excluded record
    excluded: bool
    invalid_item: bool = False  # best presented option carries no information


def option_entropies(item: TrialItem) -> dict[str, float]:
    return {
        opt: evaluate_test(
            item.circuit, item.circuit_label(opt), item.hypotheses
        ).entropy
        for opt in item.options
    }


def score_response(
    item: TrialItem, choice: str, participant: str = ""
) -> TrialRecord:
    """Entropy score of a chosen first test, normalized by the best presented
    option. Escape responses are excluded records, never zeros."""
    if choice == ESCAPE:
        return TrialRecord(
            participant=participant,
            item_id=item.item_id,
            choice=ESCAPE,
            raw_entropy=None,
            normalized_score=None,
            excluded=True,
        )
    if choice not in item.options:
        raise SessionError(f"choice {choice!r} not among the presented options")
    entropies = option_entropies(item)
    best = max(entropies.values())
    raw = entropies[choice]
    if best == 0.0:
        # normalization would divide by zero; flag rather than fabricate
        return TrialRecord(
            participant=participant,
            item_id=item.item_id,
            choice=choice,
            raw_entropy=raw,
            normalized_score=None,
            excluded=True,
            invalid_item=True,
        )
    return TrialRecord(
        participant=participant,
        item_id=item.item_id,
        choice=choice,
        raw_entropy=raw,
        normalized_score=raw / best,
        excluded=False,
    )


def best_option(item: TrialItem) -> str:
    entropies = option_entropies(item)
    best = max(entropies.values())
    return min(opt for opt, e in entropies.items() if e == best)


def random_baseline(
    items: Sequence[TrialItem], samples: int, seed: int
) -> list[float]:
    """Normalized scores of uniform random responders.

    Draws sample only from the substantive options (never the escape option).
    Each item gets its own deterministically split generator, so per-item
    streams are stable regardless of evaluation order.
    """
    if not items:
        raise SessionError("empty item list")
    if samples < 1:
        raise SessionError("need at least one sample")
    streams = np.random.SeedSequence(seed).spawn(len(items))
    scores: list[float] = []
    for item, stream in zip(items, streams):
        rng = np.random.Generator(np.random.PCG64(stream))
        entropies = option_entropies(item)
        best = max(entropies.values())
        if best == 0.0:
            continue  # invalid item, excluded from aggregates
        values = [entropies[opt] / best for opt in item.options]
        picks = rng.integers(0, len(values), size=samples)
        scores.extend(values[i] for i in picks)
    return scores


# --- comprehension effect ----------------------------------------------------

@dataclass(frozen=True)
class EffectReport:
    mean_self: float
    mean_explained: float
    effect: float  # mean_explained - mean_self
    u_statistic: float
    p_value: float
    cles: float
    mwu_method: str


def comprehension_effect(
    self_scores: Sequence[float],
    explained_scores: Sequence[float],
    self_participants: Sequence[str] | None = None,
    explained_participants: Sequence[str] | None = None,
) -> EffectReport:
    """Mean difference between the machine-explained and self-learning groups,
    with a two-sided Mann-Whitney U test. Participant id sequences, when
    given, must be disjoint across groups."""
    if self_participants is not None and explained_participants is not None:
        overlap = set(self_participants) & set(explained_participants)
        if overlap:
            raise StatsError(
                f"participants in both groups: {sorted(overlap)}"
            )
    mwu: MwuResult = mann_whitney_u(list(self_scores), list(explained_scores))
    mean_self = sum(self_scores) / len(self_scores)
    mean_explained = sum(explained_scores) / len(explained_scores)
    return EffectReport(
        mean_self=mean_self,
        mean_explained=mean_explained,
        effect=mean_explained - mean_self,
        u_statistic=mwu.u,
        p_value=mwu.p_value,
        cles=mwu.cles,
        mwu_method=mwu.method,
    )
