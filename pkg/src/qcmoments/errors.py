"""Exception types shared across the package."""


class QcmError(Exception):
    """Base class for errors raised by qcmoments."""


class QubitMismatchError(QcmError, ValueError):
    """Operands act on different qubit counts."""


class ImaginaryResidueError(QcmError, ValueError):
    """A sum that must be real accumulated an imaginary part above tolerance."""


class MissingExpectationError(QcmError, KeyError):
    """A required Pauli string has no recorded expectation value."""

    def __init__(self, label: str):
        super().__init__(label)
        self.label = label

    def __str__(self) -> str:
        return f"no expectation value recorded for Pauli string {self.label!r}"


class IncompatibleMemberError(QcmError, ValueError):
    """A Pauli string is not qubit-wise compatible with the measured basis."""


class ResourceGuardError(QcmError, ValueError):
    """The requested computation exceeds a configured size or memory guard."""


class ConvergenceError(QcmError, RuntimeError):
    """An iterative solver failed to reach the requested tolerance."""


class EstimateUndefinedError(QcmError, ArithmeticError):
    """Neither the closed-form nor the numeric energy estimate is defined."""
