"""Exception hierarchy shared by every module.

The CLI maps any :class:`QigravError` to exit status 1 and reports the class
name as the machine-readable error code.
"""

from __future__ import annotations


class QigravError(Exception):
    """Base class for all domain and contract errors raised by the library."""


class ShapeError(QigravError, ValueError):
    """Dimensions or subsystem indices do not fit together."""


class CapacityError(QigravError):
    """A requested size exceeds the configured or tractable maximum."""


class ContractError(QigravError, ValueError):
    """A precondition on an argument (unitarity, hermiticity, range) failed."""


class NumericalHealthError(QigravError, ArithmeticError):
    """A numerical invariant drifted beyond tolerance."""


class PostSelectionError(QigravError):
    """A post-measurement state was requested for an outcome of probability zero."""

    def __init__(self, message: str, probability: float = 0.0):
        super().__init__(message)
        self.probability = probability


class DomainError(QigravError, ValueError):
    """A physical parameter lies outside the admissible domain."""


class DegenerateConfigurationError(QigravError, ValueError):
    """The configuration makes a formula singular (for example R_A == R_B)."""


class ProtocolInfeasibleError(QigravError):
    """A protocol cannot run for the given physical scenario."""


class PhaseOverflowError(QigravError, OverflowError):
    """A computed phase is not finite."""
