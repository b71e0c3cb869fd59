import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultdx.circuit import (
    Circuit,
    FaultScenario,
    Outcome,
    circuit_group,
    observed_outcome,
    parse_circuit,
    print_circuit,
    simulate,
    validate,
)
from faultdx.errors import CircuitParseError, CircuitValidationError, SimulationError

from .conftest import EXAMPLE_FACTS, random_dag_circuit


class TestParse:
    def test_example_document(self, example_circuit):
        c = example_circuit
        assert c.gates == {1, 2, 3, 4, 5}
        assert c.sources == {0}
        assert c.sinks == {"lightbulb"}
        assert len(c.test_points) == 5
        assert c.test_points[3] == "output_c"
        assert (3, 4) in c.edges and (4, "lightbulb") in c.edges

    def test_empty_text(self):
        c = parse_circuit("")
        assert c.gates == frozenset() and c.edges == frozenset()
        assert "no sink" in validate(c).warnings

    def test_cycle_is_an_error(self):
        with pytest.raises(CircuitValidationError) as err:
            parse_circuit(EXAMPLE_FACTS + "is_connected(3, 1).")
        assert "1" in str(err.value) and "3" in str(err.value)

    def test_comments_and_whitespace(self):
        c = parse_circuit("% a comment\n gate( 1 ).  is_connected(0,1). % trailing\n")
        assert c.gates == {1}

    def test_syntax_error_reports_position(self):
        with pytest.raises(CircuitParseError) as err:
            parse_circuit("gate(1).\nwidget(2).")
        assert err.value.line == 2
        assert "widget" in str(err.value)

    def test_missing_dot(self):
        with pytest.raises(CircuitParseError):
            parse_circuit("gate(1)")

    def test_duplicate_label(self):
        with pytest.raises(CircuitParseError, match="duplicate"):
            parse_circuit("gate(1). gate(2). test_point_label(1, a). test_point_label(2, a).")

    def test_label_on_undeclared_gate(self):
        with pytest.raises(CircuitValidationError, match="undeclared"):
            parse_circuit("gate(1). is_connected(0,1). test_point_label(7, a).")

    def test_atom_origin_rejected(self):
        with pytest.raises(CircuitParseError):
            parse_circuit("is_connected(lightbulb, 1).")

    def test_round_trip(self, example_circuit):
        assert parse_circuit(print_circuit(example_circuit)) == example_circuit

    def test_round_trip_random(self):
        rng = random.Random(7)
        for _ in range(25):
            c = random_dag_circuit(rng)
            assert parse_circuit(print_circuit(c)) == c


class TestValidate:
    def test_example_is_clean(self, example_circuit):
        report = validate(example_circuit)
        assert report.errors == ()
        assert report.warnings == ()

    def test_isolated_gate_warns(self):
        c = Circuit([1, 7], [(0, 1), (1, "lightbulb")], {})
        report = validate(c)
        assert report.ok
        assert any("gate 7" in w for w in report.warnings)

    def test_two_gate_cycle(self):
        c = Circuit([1, 2], [(1, 2), (2, 1)], {})
        assert any("not acyclic" in e for e in validate(c).errors)

    def test_edge_to_undeclared_node(self):
        c = Circuit([1], [(0, 1), (1, 9)], {})
        assert any("undeclared" in e for e in validate(c).errors)


class TestSimulate:
    def test_fault_blocks_sink(self, example_circuit):
        state = simulate(example_circuit, FaultScenario(4, injection="output_c"))
        assert not state.lit("lightbulb")
        assert state.powered[5] and not state.powered[4]

    def test_injection_feeds_downstream(self, example_circuit):
        state = simulate(example_circuit, FaultScenario(1, injection="output_c"))
        assert state.lit("lightbulb")

    def test_injection_masks_own_fault(self, example_circuit):
        # fully-fed circuit with no fault has every node powered, so injecting
        # at the faulty gate's own output must power everything but the gate
        for g, label in example_circuit.test_points.items():
            state = simulate(example_circuit, FaultScenario(g, injection=label))
            for node, on in state.powered.items():
                assert on == (node != g)

    def test_unknown_gate(self, example_circuit):
        with pytest.raises(SimulationError):
            simulate(example_circuit, FaultScenario(42))

    def test_unknown_label(self, example_circuit):
        with pytest.raises(SimulationError):
            simulate(example_circuit, FaultScenario(1, injection="nope"))

    def test_injection_monotone(self):
        rng = random.Random(11)
        for _ in range(50):
            c = random_dag_circuit(rng)
            fault = rng.choice(sorted(c.gates))
            bare = simulate(c, FaultScenario(fault))
            for label in c.test_points.values():
                injected = simulate(c, FaultScenario(fault, injection=label))
                for node, on in bare.powered.items():
                    if on:
                        assert injected.powered[node]

    def test_determinism(self, example_circuit):
        a = simulate(example_circuit, FaultScenario(2, injection="output_e"))
        b = simulate(example_circuit, FaultScenario(2, injection="output_e"))
        assert a.powered == b.powered


class TestObservedOutcome:
    @pytest.mark.parametrize(
        "fault,test,expected",
        [
            (3, "output_c", Outcome.LIT),
            (5, "output_c", Outcome.UNLIT),
            (2, "output_a", Outcome.UNLIT),
            (1, "output_a", Outcome.LIT),
            (4, "output_d", Outcome.LIT),
        ],
    )
    def test_example_outcomes(self, example_circuit, fault, test, expected):
        assert observed_outcome(example_circuit, fault, test) == expected

    def test_ambiguous_sink_needs_name(self):
        c = Circuit(
            [1, 2, 3],
            [(0, 1), (1, 2), (1, 3), (2, "bulb_x"), (3, "bulb_y")],
            {1: "a", 2: "b", 3: "c"},
        )
        with pytest.raises(SimulationError, match="ambiguous"):
            observed_outcome(c, 2, "a")
        assert observed_outcome(c, 2, "a", sink="bulb_y") == Outcome.LIT
        assert observed_outcome(c, 2, "a", sink="bulb_x") == Outcome.UNLIT


@given(st.integers(min_value=0, max_value=100_000))
def test_circuit_group_is_block_of_100(n):
    assert circuit_group(n) == n // 100
    assert circuit_group(n) == circuit_group((n // 100) * 100)
