"""Exception hierarchy."""


class QDGatesError(Exception):
    """Base class for all errors raised by qdgates."""


class ConfigError(QDGatesError, ValueError):
    """Invalid parameters or configuration."""


class NotHermitianError(QDGatesError, ValueError):
    pass


class NumericalError(QDGatesError, RuntimeError):
    """A numerical procedure failed to converge or lost accuracy."""


class NormDriftError(NumericalError):
    """Time propagation drifted in norm beyond the allowed threshold."""


class ConvergenceError(NumericalError):
    pass
