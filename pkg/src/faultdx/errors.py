"""Exception hierarchy shared across the package."""


class FaultDxError(Exception):
    """Base class for all package errors."""


class CircuitParseError(FaultDxError):
    """Raised when fact-format text cannot be parsed.

    Carries the 1-based line and column of the offending token.
    """

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CircuitValidationError(FaultDxError):
    """Raised when a circuit violates a structural invariant."""

    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


class SimulationError(FaultDxError):
    """Raised for unknown gates/labels or ambiguous outcomes."""


class StrategyError(FaultDxError):
    """Raised for unusable strategy inputs (unknown test, empty hypothesis set)."""


class ContradictoryEvidenceError(StrategyError):
    """Raised when a test outcome eliminates every remaining hypothesis."""


class SessionError(FaultDxError):
    """Raised when a diagnosis session cannot make progress."""


class StatsError(FaultDxError):
    """Raised for degenerate statistical inputs."""


class TemplateError(FaultDxError):
    """Raised for unknown templates or unresolved placeholders."""


class ProgramParseError(FaultDxError):
    """Raised when a logic program cannot be split into clauses."""

    def __init__(self, message: str, clause_index: int):
        super().__init__(f"clause {clause_index}: {message}")
        self.clause_index = clause_index


class RatingParseError(FaultDxError):
    """Raised when a judge response carries no usable rating."""


class ClientError(FaultDxError):
    """Raised when a model client cannot produce a response."""
