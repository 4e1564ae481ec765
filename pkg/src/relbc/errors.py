"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(ValueError):
    """A tensor product would exceed the supported dimension."""


class NumericalConsistencyError(ArithmeticError):
    """Probabilities or operators drifted beyond rounding tolerance."""


class InconsistencyError(ArithmeticError):
    """An operator expected to be Hermitian is not."""


class ProtocolFault(RuntimeError):
    """A protocol rule was broken, e.g. a one-time pad was reused."""


class NonTerminationError(RuntimeError):
    """A rejection-sampling loop hit its iteration cap."""
