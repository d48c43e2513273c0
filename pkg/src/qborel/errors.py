"""Exception hierarchy shared by all qborel modules."""


class QBorelError(Exception):
    """Base class for every error raised by this package."""


class ZeroParameter(QBorelError, ValueError):
    pass


class SingularDirection(QBorelError, ValueError):
    pass


class DegenerateOperator(QBorelError, ValueError):
    pass


class NotIncreasing(QBorelError, ValueError):
    pass


class NonFinite(QBorelError, ArithmeticError):
    pass


class PoleHit(QBorelError, ArithmeticError):
    pass


class NonConvergent(QBorelError, ArithmeticError):
    pass


class DivisionNearZero(QBorelError, ArithmeticError):
    pass


class WindowExhausted(QBorelError, RuntimeError):
    """The adaptive quadrature window hit ``max_window`` before the tail stop.

    ``stage`` is filled in by the multisummation pipeline (1-based) so callers
    can tell which intermediate Laplace transform failed to converge.
    """

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        base = super().__str__()
        if self.stage is None:
            return base
        return f"stage {self.stage}: {base}"
