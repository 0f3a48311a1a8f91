"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """An argument is outside the domain an operation accepts."""


class ContractViolation(RuntimeError):
    """An input does not satisfy a structural precondition (e.g. a commutation)."""


class AccuracyError(ArithmeticError):
    """A numerical procedure could not reach its accuracy target."""
