"""AND-gate circuit model: fact-format parsing, validation, fault/injection simulation.

Circuits are directed acyclic graphs. Integer nodes that are declared via
``gate(N).`` are gates; integer nodes that only ever appear as edge origins
are batteries (always powered). Lowercase-atom edge targets are sinks
(lightbulbs). A gate or sink carries its output only when *all* of its
in-edges carry power (AND semantics). Supplying power at a gate's labeled
output terminal energizes all of that gate's out-edges, masking every fault
upstream of it.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from faultdx.errors import (
    CircuitParseError,
    CircuitValidationError,
    SimulationError,
)

NodeId = int
SinkId = str
Node = Union[NodeId, SinkId]

#: Reserved atom for the default sink in fact files.
LIGHTBULB = "lightbulb"


def circuit_group(node: NodeId) -> int:
    """Sub-circuit index of a gate; gates N and M share a group iff N//100 == M//100."""
    return node // 100


class Outcome(str, enum.Enum):
    LIT = "lit"
    UNLIT = "unlit"


@dataclass(frozen=True)
class FaultScenario:
    faulty_gate: NodeId
    injection: Optional[str] = None  # test-point label, or None for no injection


@dataclass(frozen=True)
class SignalState:
    """Power assignment for every node and sink of a circuit."""

    powered: Mapping[Node, bool]

    def lit(self, sink: SinkId) -> bool:
        return bool(self.powered[sink])


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


class Circuit:
    """Immutable directed graph of gates, batteries and sinks.

    Instances are value-comparable on their relations (gates, edges, test
    points) and safe for concurrent use; derived structure is precomputed.
    """

    def __init__(
        self,
        gates: Iterable[NodeId],
        edges: Iterable[tuple[NodeId, Node]],
        test_points: Mapping[NodeId, str] | None = None,
    ):
        self.gates: frozenset[NodeId] = frozenset(gates)
        self.edges: frozenset[tuple[NodeId, Node]] = frozenset(edges)
        self.test_points: dict[NodeId, str] = dict(test_points or {})

        self.sources: frozenset[NodeId] = frozenset(
            o for o, _ in self.edges if o not in self.gates
        )
        self.sinks: frozenset[SinkId] = frozenset(
            t for _, t in self.edges if isinstance(t, str)
        )
        endpoints = {o for o, _ in self.edges} | {t for _, t in self.edges}
        self._all_nodes: frozenset[Node] = self.gates | self.sources | self.sinks | endpoints
        self.children: dict[Node, frozenset[Node]] = {}
        self.parents: dict[Node, frozenset[NodeId]] = {}
        kids: dict[Node, set[Node]] = {}
        pars: dict[Node, set[NodeId]] = {}
        for o, t in self.edges:
            kids.setdefault(o, set()).add(t)
            pars.setdefault(t, set()).add(o)
        for n in self._all_nodes:
            self.children[n] = frozenset(kids.get(n, ()))
            self.parents[n] = frozenset(pars.get(n, ()))
        self.label_to_gate: dict[str, NodeId] = {
            label: g for g, label in self.test_points.items()
        }
        # memo for strategy.exclusive_power_set; keyed by point
        self._exclusive_cache: dict[Node, frozenset[NodeId]] = {}

    def nodes(self) -> frozenset[Node]:
        return self._all_nodes

    def gate_for_label(self, label: str) -> NodeId:
        try:
            return self.label_to_gate[label]
        except KeyError:
            raise SimulationError(f"unknown test point label {label!r}") from None

    def _relations(self):
        return (self.gates, self.edges, frozenset(self.test_points.items()))

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self._relations() == other._relations()

    def __hash__(self):
        return hash(self._relations())

    def __repr__(self):
        return (
            f"Circuit(gates={sorted(self.gates)}, edges={len(self.edges)}, "
            f"test_points={len(self.test_points)})"
        )

    def topological_order(self) -> list[Node]:
        """Kahn ordering over all nodes; raises if the edge relation has a cycle."""
        order = topological_order_or_cycle(self)
        if isinstance(order, CycleFound):
            raise CircuitValidationError(
                [f"not acyclic: cycle through nodes {sorted(order.nodes, key=str)}"]
            )
        return order


@dataclass(frozen=True)
class CycleFound:
    nodes: frozenset[NodeId]


def _kahn_leftover(nodes, degree_of, neighbours):
    deg = {n: degree_of(n) for n in nodes}
    queue = sorted((n for n, d in deg.items() if d == 0), key=str)
    order = []
    while queue:
        n = queue.pop(0)
        order.append(n)
        for t in sorted(neighbours(n), key=str):
            deg[t] -= 1
            if deg[t] == 0:
                queue.append(t)
    return order, frozenset(n for n, d in deg.items() if d > 0)


def topological_order_or_cycle(c: Circuit) -> list[Node] | CycleFound:
    nodes = c.nodes()
    order, leftover = _kahn_leftover(
        nodes, lambda n: len(c.parents[n]), lambda n: c.children[n]
    )
    if leftover:
        # name only nodes actually on a cycle, not everything downstream
        _, backward = _kahn_leftover(
            nodes, lambda n: len(c.children[n]), lambda n: c.parents[n]
        )
        return CycleFound(leftover & backward)
    return order


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>%[^\n]*)
      | (?P<int>\d+)
      | (?P<atom>[a-z][a-zA-Z0-9_]*)
      | (?P<punct>[().,])
    """,
    re.VERBOSE,
)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _position(self, at: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, at) + 1
        col = at - (self.text.rfind("\n", 0, at) + 1) + 1
        return line, col

    def error(self, message: str, at: int | None = None):
        line, col = self._position(self.pos if at is None else at)
        raise CircuitParseError(message, line, col)

    def next_token(self) -> tuple[str, str, int] | None:
        while self.pos < len(self.text):
            m = _TOKEN.match(self.text, self.pos)
            if m is None:
                self.error(f"unexpected character {self.text[self.pos]!r}")
            start = self.pos
            self.pos = m.end()
            kind = m.lastgroup
            if kind in ("ws", "comment"):
                continue
            return kind, m.group(), start
        return None

    def expect(self, kinds: tuple[str, ...], what: str) -> tuple[str, str, int]:
        tok = self.next_token()
        if tok is None:
            self.error(f"unexpected end of input, expected {what}", at=len(self.text))
        if tok[0] not in kinds and not (tok[0] == "punct" and tok[1] in kinds):
            self.error(f"expected {what}, got {tok[1]!r}", at=tok[2])
        return tok


def parse_circuit(text: str) -> Circuit:
    """Parse fact-format circuit source into a validated Circuit.

    Recognized facts: ``gate(N).``, ``test_point_label(N, name).``,
    ``is_connected(A, B).`` — ``%`` starts a line comment. Raises
    CircuitParseError on syntax problems and CircuitValidationError when the
    fact set violates a structural invariant (cycles, dangling labels).
    """
    sc = _Scanner(text)
    gates: set[NodeId] = set()
    edges: set[tuple[NodeId, Node]] = set()
    test_points: dict[NodeId, str] = {}
    seen_labels: set[str] = set()

    while True:
        tok = sc.next_token()
        if tok is None:
            break
        kind, value, start = tok
        if kind != "atom":
            sc.error(f"expected a fact name, got {value!r}", at=start)
        functor = value
        sc.expect(("(",), "'('")

        def _node(allow_atom: bool) -> Node:
            k, v, at = sc.expect(("int", "atom"), "a node")
            if k == "int":
                return int(v)
            if not allow_atom:
                sc.error(f"expected an integer node, got atom {v!r}", at=at)
            return v

        if functor == "gate":
            gates.add(_node(allow_atom=False))
        elif functor == "test_point_label":
            g = _node(allow_atom=False)
            sc.expect((",",), "','")
            _, label, at = sc.expect(("atom",), "a label atom")
            if label in seen_labels:
                sc.error(f"duplicate test point label {label!r}", at=at)
            seen_labels.add(label)
            test_points[g] = label
        elif functor == "is_connected":
            k, v, at = sc.expect(("int", "atom"), "a node")
            if k == "atom":
                sc.error(f"edge origin must be a gate or battery id, got {v!r}", at=at)
            origin = int(v)
            sc.expect((",",), "','")
            target = _node(allow_atom=True)
            edges.add((origin, target))
        else:
            sc.error(f"unknown fact {functor!r}", at=start)
        sc.expect((")",), "')'")
        sc.expect((".",), "'.'")

    circuit = Circuit(gates, edges, test_points)
    report = validate(circuit)
    if not report.ok:
        raise CircuitValidationError(report.errors)
    return circuit


def print_circuit(c: Circuit) -> str:
    """Emit fact-format source; parse_circuit(print_circuit(c)) is relation-identical."""
    lines = [f"gate({g})." for g in sorted(c.gates)]
    lines += [
        f"test_point_label({g}, {label})." for g, label in sorted(c.test_points.items())
    ]
    lines += [f"is_connected({o}, {t})." for o, t in sorted(c.edges, key=lambda e: (e[0], str(e[1])))]
    return "\n".join(lines) + ("\n" if lines else "")


# --- validation --------------------------------------------------------------

def validate(c: Circuit) -> ValidationReport:
    """Check structural invariants; errors reject the circuit, warnings do not."""
    errors: list[str] = []
    warnings: list[str] = []

    order = topological_order_or_cycle(c)
    if isinstance(order, CycleFound):
        errors.append(
            f"not acyclic: cycle through nodes {sorted(order.nodes, key=str)}"
        )

    for g, label in sorted(c.test_points.items()):
        if g not in c.gates:
            errors.append(f"test point {label!r} attached to undeclared gate {g}")
    labels = list(c.test_points.values())
    for label in sorted(set(labels)):
        if labels.count(label) > 1:
            errors.append(f"duplicate test point label {label!r}")

    for o, t in sorted(c.edges, key=lambda e: (e[0], str(e[1]))):
        if isinstance(t, int) and t not in c.gates:
            errors.append(f"edge ({o}, {t}) targets undeclared node {t}")

    if not c.sinks:
        warnings.append("no sink")

    if not isinstance(order, CycleFound):
        # gates must lie on some source-to-sink path
        reaches_sink: set[Node] = set(c.sinks)
        for n in reversed(order):
            if n in reaches_sink or any(t in reaches_sink for t in c.children[n]):
                reaches_sink.add(n)
        fed: set[Node] = set(c.sources)
        for n in order:
            if n in fed or any(p in fed for p in c.parents[n]):
                fed.add(n)
        for g in sorted(c.gates):
            if g not in reaches_sink or g not in fed:
                warnings.append(f"gate {g} unreachable/unproductive")

    return ValidationReport(tuple(errors), tuple(warnings))


# --- simulation --------------------------------------------------------------

def simulate(c: Circuit, s: FaultScenario) -> SignalState:
    """Deterministic signal assignment under a single faulty gate and optional injection.

    A gate is powered iff it is not faulty and every in-edge carries power.
    An in-edge carries power iff its origin is a battery, is powered, or is the
    gate whose output terminal holds the injected power source.
    """
    if s.faulty_gate not in c.gates:
        raise SimulationError(f"unknown gate {s.faulty_gate}")
    injection_gate: Optional[NodeId] = None
    if s.injection is not None:
        injection_gate = c.gate_for_label(s.injection)

    powered: dict[Node, bool] = {}
    for n in c.topological_order():
        if n in c.sources:
            powered[n] = True
            continue
        feeds = all(
            (p in c.sources) or powered[p] or (p == injection_gate)
            for p in c.parents[n]
        )
        if isinstance(n, str):  # sink
            powered[n] = feeds
        else:
            powered[n] = feeds and n != s.faulty_gate
    return SignalState(powered)


def observed_outcome(
    c: Circuit,
    fault: NodeId,
    test: str,
    sink: Optional[SinkId] = None,
) -> Outcome:
    """Sink state after injecting power at ``test`` with ``fault`` present.

    The relevant sink is the unique sink reachable from the tested gate's
    sub-circuit; with several reachable sinks the caller must name one.
    """
    tested_gate = c.gate_for_label(test)
    if sink is None:
        relevant = _reachable_sinks(c, tested_gate)
        if len(relevant) > 1:
            raise SimulationError(
                f"ambiguous outcome: sinks {sorted(relevant)} reachable from the "
                f"tested sub-circuit; name the sink"
            )
        if not relevant:
            raise SimulationError(f"no sink reachable from test point {test!r}")
        (sink,) = relevant
    elif sink not in c.sinks:
        raise SimulationError(f"unknown sink {sink!r}")
    state = simulate(c, FaultScenario(faulty_gate=fault, injection=test))
    return Outcome.LIT if state.lit(sink) else Outcome.UNLIT


def _reachable_sinks(c: Circuit, gate: NodeId) -> frozenset[SinkId]:
    group = circuit_group(gate)
    start = {g for g in c.gates if circuit_group(g) == group}
    seen: set[Node] = set(start)
    stack = list(start)
    while stack:
        n = stack.pop()
        for t in c.children.get(n, ()):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return frozenset(s for s in c.sinks if s in seen)
