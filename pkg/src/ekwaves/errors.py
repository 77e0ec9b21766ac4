"""Exception hierarchy shared by all modules."""


class EKError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(EKError):
    """Invalid configuration or arguments (unknown model, bad grid, ...)."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DomainError(EKError):
    """Density outside the validity interval of the fluid model."""


class StateError(EKError):
    """Invalid field state (vacuum, NaN, boundary mismatch)."""


class BlowupError(StateError):
    """Time stepping produced vacuum or NaN."""

    def __init__(self, message, t):
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t


class NumericalError(EKError):
    """A numerical procedure failed to converge or lost accuracy."""


class ResolutionError(NumericalError):
    """Two independent evaluations disagree beyond tolerance."""


class ProfileError(EKError):
    """Traveling-wave construction failed."""


class NoKinkFoundError(ProfileError):
    """Root finding for kink endstates did not produce a genuine kink."""


class SaddleViolationError(ProfileError):
    """Endstates of a candidate kink are not saddle points."""


class NoSolitonError(ProfileError):
    """No homoclinic orbit (no admissible minimum density)."""


class PreconditionError(ProfileError):
    """A stated precondition is violated (e.g. supersonic speed)."""


class WindowError(EKError):
    """A wave center falls outside the computational window."""


class DivergenceError(NumericalError):
    """The Newton iteration diverged."""

    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration
