"""Exception hierarchy.

Validation problems derive from :class:`ValueError` so callers can treat them
as bad input; numerical failures derive from :class:`ArithmeticError`.
"""


class XXTransferError(Exception):
    """Base class for all package errors."""


class InvalidInit(XXTransferError, ValueError):
    """Channel initialization incompatible with the chain length."""


class SizeLimit(XXTransferError, ValueError):
    """Problem size exceeds a configured dense-algebra cap."""


class NumericalError(XXTransferError, ArithmeticError):
    """Base class for numerical failures."""


class NonConvergence(NumericalError):
    def __init__(self, message, index=None, residual=None):
        super().__init__(message)
        self.index = index
        self.residual = residual


class NumericalInstability(NumericalError):
    pass


class PositivityViolation(NumericalError):
    pass


class NotPure(XXTransferError, ValueError):
    pass


class BracketFailure(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass
