"""Exception hierarchy shared by the numerical modules and the CLI."""


class OmsimError(Exception):
    """Base class for all errors raised by omsim."""


class ConfigError(OmsimError, ValueError):
    """Invalid parameters or scenario configuration.

    ``field`` names the offending input so the CLI can report it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class NumericalError(OmsimError, ArithmeticError):
    """A solver could not produce a trustworthy result."""


class UnstableModelError(NumericalError):
    """The drift matrix has an eigenvalue with non-negative real part."""


class ConvergenceError(NumericalError):
    """An iterative method ran out of budget.

    ``residual`` carries the last measured residual, if any.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class UnphysicalStateError(NumericalError):
    """A covariance matrix violates the uncertainty principle."""
