"""Exception types raised across the package."""


class PHTrafficError(Exception):
    """Base class for all package errors."""


class DomainError(PHTrafficError, ValueError):
    """An argument lies outside the domain of a function (e.g. non-finite spacing)."""


class UnsupportedConfigurationError(PHTrafficError, ValueError):
    """The requested analysis is not defined for these parameters.

    Raised, for instance, when a linear analysis is requested with the
    piecewise-linear optimal velocity function.
    """


class InfeasibleError(PHTrafficError, ValueError):
    """No stationary law exists for the given parameters."""


class ConditioningError(PHTrafficError, ArithmeticError):
    """An eigenbasis is too ill-conditioned to be trusted."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class DegenerateKernelError(PHTrafficError, ArithmeticError):
    """The drift matrix has more than one eigenvalue at zero."""


class NumericalBlowupError(PHTrafficError, FloatingPointError):
    """A simulated coordinate became non-finite.

    Attributes
    ----------
    step : int
        Index of the first step (1-based) whose result was non-finite.
    """

    def __init__(self, step, message=None):
        super().__init__(message or f"non-finite state after step {step}")
        self.step = step


class UndefinedACFError(PHTrafficError, ValueError):
    """The speed series has zero variance, so its ACF is undefined."""


class ConfigError(PHTrafficError, ValueError):
    """A scenario configuration file is invalid.

    Attributes
    ----------
    key : str or None
        Offending key, when one can be named.
    lines : tuple of int
        1-based line numbers involved.
    """

    def __init__(self, message, key=None, lines=()):
        where = ""
        if lines:
            where = " (line " + ", ".join(str(n) for n in lines) + ")"
        super().__init__(message + where)
        self.key = key
        self.lines = tuple(lines)
