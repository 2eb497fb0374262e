"""Exception types raised by sbwave."""


class SBWaveError(Exception):
    """Base class for all package errors."""


class DomainError(SBWaveError, ValueError):
    """Wave parameters fall outside the region where the profile exists."""


class ConvergenceError(SBWaveError, RuntimeError):
    pass


class BlowupDetected(SBWaveError, RuntimeError):
    """A field norm exceeded the blowup threshold during time stepping."""

    def __init__(self, t, norm):
        super().__init__(f"field norm {norm:.3e} exceeded threshold at t={t:.6g}")
        self.t = t
        self.norm = norm


class DegeneratePhase(SBWaveError, ArithmeticError):
    pass


class DegenerateConstraints(SBWaveError, ValueError):
    pass


class UsageError(SBWaveError, ValueError):
    """Bad command line or config file input."""

    def __init__(self, message, token=None):
        super().__init__(message if token is None else f"{message}: {token!r}")
        self.token = token
