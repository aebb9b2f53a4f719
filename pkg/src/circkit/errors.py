"""Exception hierarchy shared by every circkit module."""

from __future__ import annotations


class CircuitError(Exception):
    """Base class for all circkit errors."""


class ValidationError(CircuitError):
    """A circuit violates the well-formedness rules; carries the violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"{len(self.violations)} violation(s): {lines}{more}")


class CircuitSyntaxError(CircuitError, ValueError):
    def __init__(self, line: int, column: int, expected: str):
        self.line = line
        self.column = column
        self.expected = expected
        super().__init__(f"line {line}, column {column}: expected {expected}")


class CyclicSubroutines(CircuitError):
    pass


class NotReversible(CircuitError):
    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(f"gate {index} is not reversible" + (f": {message}" if message else ""))


# builder errors
class DeadWire(CircuitError):
    pass


class WrongKind(CircuitError):
    pass


class ArityMismatch(CircuitError, ValueError):
    pass


class AncillaEscape(CircuitError):
    pass


class NotControllable(CircuitError):
    pass


class OverlapError(CircuitError):
    pass


class ShapeMismatch(CircuitError):
    pass


class BodyNotShapePreserving(CircuitError):
    pass


class OpenScope(CircuitError):
    pass


class PendingLift(CircuitError):
    pass


# transform errors
class ShapeViolation(CircuitError):
    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(f"replacement for gate {index} breaks liveness" + (f": {message}" if message else ""))


class NotLowerable(CircuitError):
    pass


class InsufficientBaseSet(CircuitError):
    pass


# simulator errors
class AssertionFailed(CircuitError):
    """A termination found its wire outside the asserted basis state."""

    def __init__(self, index: int, weight: float):
        self.index = index
        self.weight = weight
        super().__init__(f"termination at gate {index} failed: asserted-state weight {weight:.12g}")


class CapacityExceeded(CircuitError):
    pass


class NotUnitaryCircuit(CircuitError):
    pass


class NonTerminating(CircuitError):
    pass
