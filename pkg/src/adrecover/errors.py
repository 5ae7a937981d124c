"""Exception hierarchy.

``ValidationError`` subclasses signal bad inputs (CLI exit code 2);
``NumericalError`` subclasses signal a computation that could not produce a
meaningful result (CLI exit code 3).
"""


class AdRecoverError(Exception):
    pass


class ValidationError(AdRecoverError, ValueError):
    pass


class NumericalError(AdRecoverError, ArithmeticError):
    pass


class NotHermitian(ValidationError):
    pass


class NotUnitTrace(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DegenerateDamping(ValidationError):
    """p = 1 leaves no excited-state amplitude to restore."""


class NoInitialEntanglement(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass


class ZeroSuccess(NumericalError):
    """Post-selection succeeded with (numerically) zero probability."""
