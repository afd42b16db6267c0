"""
Exceptions raised by the rigorous numerics layer.
"""


class NumericsError(Exception):
    """Base class for errors raised by the numerics package."""


class NotInvertibleError(NumericsError, ZeroDivisionError):
    """Division by an enclosure that contains zero."""


class DomainError(NumericsError, ValueError):
    """Argument enclosure leaves the domain of the requested function."""


class ResonanceError(NumericsError, ZeroDivisionError):
    """A divisor k1*lambda1 + k2*lambda2 is not bounded away from zero."""


class SingularMatrixError(NumericsError, ArithmeticError):
    """Matrix is singular to working precision."""


class MixedArithmeticError(NumericsError, TypeError):
    """A binary64 value was combined with an enclosure without explicit promotion."""
