"""Exception and warning types shared across the package."""


class IonCVError(Exception):
    """Base class for all package errors."""


class LayoutError(IonCVError, ValueError):
    """Unknown mode, mismatched layouts or out-of-range basis labels."""


class TruncationError(IonCVError):
    """A gate or evolution pushes population past the phonon truncation."""

    def __init__(self, message, leak=None):
        super().__init__(message)
        self.leak = leak


class TruncationWarning(UserWarning):
    pass


class SeparabilityError(IonCVError):
    """A Gaussian gate left the qubit entangled with the motion."""

    def __init__(self, message, purity=None):
        super().__init__(message)
        self.purity = purity


class IntegrationError(IonCVError):
    """The adaptive integrator failed (step-size underflow or similar)."""


class DriveError(IonCVError, ValueError):
    """A laser configuration does not match any toolbox pattern."""


class IllConditionedError(IonCVError):
    """Population inference dictionary is numerically degenerate."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SamplingWarning(UserWarning):
    pass
