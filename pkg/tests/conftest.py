import random

import pytest

from faultdx.circuit import Circuit, parse_circuit, validate

# The worked 5-gate example: two parallel input branches joined at gate 3,
# which feeds two parallel output branches into a single lightbulb.
EXAMPLE_FACTS = """\
gate(1). gate(2). gate(3). gate(4). gate(5).

test_point_label(1, output_a).
test_point_label(2, output_b).
test_point_label(3, output_c).
test_point_label(4, output_d).
test_point_label(5, output_e).

is_connected(0, 1). is_connected(0, 2).
is_connected(1, 3). is_connected(2, 3).
is_connected(3, 4). is_connected(3, 5).
is_connected(4, lightbulb).
is_connected(5, lightbulb).
"""


@pytest.fixture
def example_circuit() -> Circuit:
    return parse_circuit(EXAMPLE_FACTS)


def chain_circuit(n: int) -> Circuit:
    """Linear circuit 0 -> 1 -> ... -> n -> lightbulb with a test on every gate."""
    edges = [(i, i + 1) for i in range(n)] + [(n, "lightbulb")]
    gates = range(1, n + 1)
    labels = {g: f"t{g:02d}" for g in gates}
    return Circuit(gates, edges, labels)


def random_dag_circuit(rng: random.Random, max_gates: int = 12) -> Circuit:
    """Random single-group DAG circuit with a battery, one sink, and a test
    point on every gate. Always validates cleanly: every gate lies on a
    battery-to-sink path by construction."""
    n = rng.randint(1, max_gates)
    gates = list(range(1, n + 1))
    edges: set[tuple[int, object]] = set()
    for g in gates:
        # feed from the battery or an earlier gate (keeps the graph acyclic)
        feeds = [0] + [h for h in gates if h < g]
        for p in rng.sample(feeds, k=min(len(feeds), rng.randint(1, 2))):
            edges.add((p, g))
        if rng.random() < 0.3:
            edges.add((0, g))
    # every gate must reach the sink: terminal gates drain into the lightbulb,
    # plus some random extra drains
    children = {g: [t for o, t in edges if o == g] for g in gates}
    for g in gates:
        if not children[g]:
            edges.add((g, "lightbulb"))
        elif rng.random() < 0.2:
            edges.add((g, "lightbulb"))
    labels = {g: f"t{g:02d}" for g in gates}
    c = Circuit(gates, edges, labels)
    assert validate(c).ok
    return c
