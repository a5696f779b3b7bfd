"""Exception hierarchy.

Input problems derive from :class:`InputError` (also a ``ValueError``),
numerical breakdowns from :class:`NumericalError`.  The CLI maps these
families onto exit codes.
"""


class InterlaceError(Exception):
    """Base class for every error raised by this package."""


class InputError(InterlaceError, ValueError):
    pass


class NumericalError(InterlaceError, ArithmeticError):
    pass


class LengthMismatch(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class DegenerateSpectrum(InputError):
    pass


class NotHermitian(InputError):
    pass


class BasisNotUnitary(InputError):
    pass


class BoundaryPoint(InputError):
    pass


class ShiftNotAboveSpectrum(InputError):
    pass


class FrozenMismatch(InputError):
    pass


class NotInterlacing(InputError):
    """Target spectrum violates the interlacing chain.

    ``violation`` holds a short human readable inequality such as
    ``"mu[0] > lambda[1]"``.
    """

    def __init__(self, violation, message=None):
        self.violation = violation
        super().__init__(message or f"not interlacing: {violation}")


class NotInPolytope(NotInterlacing):
    pass


class NoConvergence(NumericalError):
    pass


class NegativeWeight(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    pass
