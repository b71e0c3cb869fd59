"""Fault diagnosis in AND-gate circuits with entropy-optimal test selection."""

from faultdx.circuit import (
    Circuit,
    FaultScenario,
    Outcome,
    SignalState,
    ValidationReport,
    observed_outcome,
    parse_circuit,
    print_circuit,
    simulate,
    validate,
)
from faultdx.strategy import (
    TestEvaluation,
    binary_entropy,
    evaluate_test,
    exclusive_power_set,
    minority_ratio,
    optimal_test,
    partition,
    prune,
)

__all__ = [
    "Circuit",
    "FaultScenario",
    "Outcome",
    "SignalState",
    "ValidationReport",
    "observed_outcome",
    "parse_circuit",
    "print_circuit",
    "simulate",
    "validate",
    "TestEvaluation",
    "binary_entropy",
    "evaluate_test",
    "exclusive_power_set",
    "minority_ratio",
    "optimal_test",
    "partition",
    "prune",
]

__version__ = "0.1.0"
