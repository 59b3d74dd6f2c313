"""Exception hierarchy shared by all toricstab modules."""


class ToricStabError(Exception):
    """Base class for every error raised by toricstab."""


class ZeroVectorError(ToricStabError, ValueError):
    pass


class SingularMatrixError(ToricStabError, ValueError):
    pass


class FanError(ToricStabError, ValueError):
    """Raised when a list of rays does not describe a complete fan."""


class RayCollapsedError(ToricStabError, ValueError):
    pass


class NotHomeomorphismError(ToricStabError, ValueError):
    pass


class OrientationError(ToricStabError, ValueError):
    pass


class PreconditionError(ToricStabError, ValueError):
    pass


class CoefficientGrowthError(ToricStabError, ArithmeticError):
    """An integer exceeded the configured bit budget."""


class UndeterminedRotation(ToricStabError):
    """No periodic ray was found up to the requested period."""


class NotStabilizable(ToricStabError):
    """The rotation number is irrational: no iterate can be stabilized."""


class StabilizationError(ToricStabError, RuntimeError):
    """The refinement loop hit a resource bound before finishing.

    ``log`` carries the refinement steps performed so far.
    """

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = list(log or [])
