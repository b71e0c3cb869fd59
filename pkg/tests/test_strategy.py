import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from faultdx.circuit import Circuit, Outcome, observed_outcome, circuit_group
from faultdx.errors import ContradictoryEvidenceError, StrategyError
from faultdx.strategy import (
    binary_entropy,
    evaluate_test,
    exclusive_power_set,
    minority_ratio,
    optimal_test,
    partition,
    prune,
)

from .conftest import chain_circuit, random_dag_circuit


class TestExclusivePowerSet:
    def test_example_inner_gate(self, example_circuit):
        assert exclusive_power_set(example_circuit, 3) == {1, 2}

    def test_example_sink(self, example_circuit):
        assert exclusive_power_set(example_circuit, "lightbulb") == {1, 2, 3, 4, 5}

    def test_chain_head_is_empty(self):
        c = Circuit([1, 2], [(0, 1), (1, 2), (2, "lightbulb")], {1: "a", 2: "b"})
        assert exclusive_power_set(c, 1) == frozenset()

    def test_unknown_point(self, example_circuit):
        with pytest.raises(StrategyError):
            exclusive_power_set(example_circuit, 42)

    def test_matches_path_dominance(self):
        # independent oracle: g is in the set iff g has some path to a sink and
        # every path from g ends at the point before reaching any sink
        def all_paths_hit(c, g, point):
            def paths(n):
                if n == point:
                    yield True
                    return
                if n in c.sinks:
                    yield False
                    return
                outs = c.children[n]
                if not outs:
                    yield False
                    return
                for t in outs:
                    yield from paths(t)

            results = list(paths(g))
            return bool(results) and all(results)

        rng = random.Random(3)
        for _ in range(60):
            c = random_dag_circuit(rng)
            for point in sorted(c.gates):
                expected = {
                    g
                    for g in c.gates
                    if g != point
                    and circuit_group(g) == circuit_group(point)
                    and c.children[g]
                    and all_paths_hit(c, g, point)
                }
                assert exclusive_power_set(c, point) == expected


class TestPartition:
    def test_example_balanced(self, example_circuit):
        inside, outside, excluded = partition(example_circuit, "output_c", {1, 2, 3, 4, 5})
        assert inside == {1, 2, 3}
        assert outside == {4, 5}
        assert excluded == frozenset()

    def test_example_head(self, example_circuit):
        inside, outside, _ = partition(example_circuit, "output_a", {1, 2, 3, 4, 5})
        assert inside == {1}
        assert outside == {2, 3, 4, 5}

    def test_singleton_not_dominated(self, example_circuit):
        inside, outside, _ = partition(example_circuit, "output_c", {4})
        assert inside == frozenset()
        assert outside == {4}

    def test_other_group_hypotheses_excluded(self):
        c = Circuit(
            [1, 2, 101],
            [(0, 1), (1, 2), (2, "lightbulb"), (100, 101), (101, "other_bulb")],
            {1: "a", 2: "b", 101: "far"},
        )
        inside, outside, excluded = partition(c, "b", {1, 2, 101})
        assert inside == {1, 2}
        assert outside == frozenset()
        assert excluded == {101}

    def test_unknown_test(self, example_circuit):
        with pytest.raises(Exception):
            partition(example_circuit, "nope", {1})


class TestScalars:
    def test_minority_ratio_values(self):
        assert minority_ratio(3, 2) == pytest.approx(0.4)
        assert minority_ratio(5, 0) == 0.0
        for k in (1, 4, 9):
            assert minority_ratio(k, k) == 0.5

    def test_minority_ratio_empty(self):
        with pytest.raises(StrategyError):
            minority_ratio(0, 0)

    def test_binary_entropy_values(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.4) == pytest.approx(0.9709505944546686, abs=1e-9)

    def test_binary_entropy_domain(self):
        with pytest.raises(StrategyError):
            binary_entropy(1.5)

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_entropy_symmetric(self, p):
        assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)

    @given(
        st.floats(min_value=0.0, max_value=0.5),
        st.floats(min_value=0.0, max_value=0.5),
    )
    def test_entropy_monotone_on_lower_half(self, lo, hi):
        if lo <= hi:
            assert binary_entropy(lo) <= binary_entropy(hi)

    def test_entropy_strictly_increasing_on_grid(self):
        grid = [i / 100 for i in range(51)]
        values = [binary_entropy(p) for p in grid]
        assert all(a < b for a, b in zip(values, values[1:]))


class TestEvaluateTest:
    def test_example_entropies(self, example_circuit):
        v = {1, 2, 3, 4, 5}
        assert evaluate_test(example_circuit, "output_c", v).entropy == pytest.approx(
            0.970951, abs=1e-6
        )
        assert evaluate_test(example_circuit, "output_a", v).entropy == pytest.approx(
            0.721928, abs=1e-6
        )

    def test_empty_inside_zero_entropy(self, example_circuit):
        ev = evaluate_test(example_circuit, "output_c", {4, 5})
        assert ev.inside == frozenset()
        assert ev.entropy == 0.0


class TestOptimalTest:
    def test_example(self, example_circuit):
        label, sizes = optimal_test(example_circuit, {1, 2, 3, 4, 5})
        assert label == "output_c"
        assert sizes == (3, 2)

    def test_chain_of_four(self):
        c = chain_circuit(4)
        label, sizes = optimal_test(c, c.gates)
        assert label == "t02"
        assert sizes == (2, 2)

    def test_singleton_returns_first_label(self, example_circuit):
        label, sizes = optimal_test(example_circuit, {4})
        assert label == "output_a"
        assert sum(sizes) == 1

    def test_no_test_points(self):
        c = Circuit([1], [(0, 1), (1, "lightbulb")], {})
        with pytest.raises(StrategyError):
            optimal_test(c, {1})

    def test_maximizes_min_size(self):
        rng = random.Random(5)
        for _ in range(40):
            c = random_dag_circuit(rng)
            v = frozenset(c.gates)
            label, sizes = optimal_test(c, v)
            for other in c.test_points.values():
                inside, outside, _ = partition(c, other, v)
                assert min(sizes) >= min(len(inside), len(outside))

    def test_choice_invariant_under_irrelevant_gates(self, example_circuit):
        # adding gates in a different sub-circuit never changes the choice
        extra_edges = {(100, 101), (101, 102), (102, "spare_bulb")}
        widened = Circuit(
            example_circuit.gates | {101, 102},
            example_circuit.edges | extra_edges,
            dict(example_circuit.test_points),
        )
        assert optimal_test(widened, {1, 2, 3, 4, 5}) == optimal_test(
            example_circuit, {1, 2, 3, 4, 5}
        )


class TestPrune:
    def test_lit_keeps_inside(self, example_circuit):
        ev = evaluate_test(example_circuit, "output_c", {1, 2, 3, 4, 5})
        assert prune({1, 2, 3, 4, 5}, ev, Outcome.LIT) == {1, 2, 3}
        assert prune({1, 2, 3, 4, 5}, ev, Outcome.UNLIT) == {4, 5}

    def test_contradiction(self, example_circuit):
        ev = evaluate_test(example_circuit, "output_a", {4, 5})
        with pytest.raises(ContradictoryEvidenceError):
            prune({4, 5}, ev, Outcome.LIT)

    def test_partition_law(self):
        rng = random.Random(9)
        for _ in range(40):
            c = random_dag_circuit(rng)
            v = frozenset(c.gates)
            for label in sorted(c.test_points.values()):
                ev = evaluate_test(c, label, v)
                if ev.inside and ev.outside:
                    lit = prune(v, ev, Outcome.LIT)
                    unlit = prune(v, ev, Outcome.UNLIT)
                    assert lit | unlit == v - ev.excluded
                    assert not (lit & unlit)


class TestOracleEquivalence:
    def test_partition_matches_simulation(self):
        # the central check: the fixpoint partition equals exhaustive simulation
        rng = random.Random(2024)
        for _ in range(120):
            c = random_dag_circuit(rng)
            v = frozenset(c.gates)
            for label in sorted(c.test_points.values()):
                gate = c.gate_for_label(label)
                group = circuit_group(gate)
                inside, outside, _ = partition(c, label, v)
                lit_faults = {
                    g
                    for g in v
                    if circuit_group(g) == group
                    and observed_outcome(c, g, label) == Outcome.LIT
                }
                assert inside == lit_faults
                assert outside == {
                    g for g in v if circuit_group(g) == group
                } - lit_faults
