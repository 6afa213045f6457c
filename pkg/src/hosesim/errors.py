"""Exception hierarchy shared by all hosesim modules."""


class HoseSimError(Exception):
    """Base class for every error raised by hosesim."""

    #: process exit status used by the CLI
    exit_code = 1


class ConfigurationError(HoseSimError, ValueError):
    exit_code = 2


class ResolutionError(HoseSimError, ValueError):
    exit_code = 2


class RangeError(HoseSimError, ValueError):
    pass


class DomainError(HoseSimError, ValueError):
    pass


class ConvergenceError(HoseSimError, RuntimeError):
    """Iterative solve stopped before reaching the requested tolerance."""

    def __init__(self, message, residual_history=()):
        super().__init__(message)
        self.residual_history = list(residual_history)


class RegimeError(HoseSimError, ValueError):
    """Josephson energy dropped to or below the charging energy."""


class ArityError(HoseSimError, ValueError):
    pass


class DegeneracyError(HoseSimError, ValueError):
    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class ShapeError(HoseSimError, ValueError):
    pass


class InfeasibleError(HoseSimError, ValueError):
    def __init__(self, message, minimum_settle=None):
        super().__init__(message)
        self.minimum_settle = minimum_settle


class ConditioningError(HoseSimError, ValueError):
    pass
