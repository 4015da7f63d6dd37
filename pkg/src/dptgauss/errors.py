"""Exception types raised across the package."""


class DptError(Exception):
    """Base class for all errors raised by dptgauss."""


class InvalidDimension(DptError, ValueError):
    pass


class InvalidMatrix(DptError, ValueError):
    pass


class InvalidPartition(DptError, ValueError):
    pass


class InvalidState(DptError, ValueError):
    """Covariance matrix violates the uncertainty principle."""


class InvalidChannel(DptError, ValueError):
    """Channel is not completely positive, or has the wrong shape."""


class InvalidParams(DptError, ValueError):
    pass


class PoleProximity(DptError, ValueError):
    """Parameters sit too close to the linearization pole 1 - s_a C_a - s_b C_b = 0."""


class SingularResolvent(DptError, ArithmeticError):
    def __init__(self, omega, msg=None):
        self.omega = omega
        super().__init__(msg or f"resolvent (-i w I - A) is singular at w={omega!r}")


class ModelInconsistency(DptError, RuntimeError):
    """An internally constructed object failed a consistency check (a bug, not physics)."""


class NotPhaseInsensitive(DptError, RuntimeError):
    pass


class DegenerateState(DptError, ValueError):
    pass
