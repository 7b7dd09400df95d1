"""Exception hierarchy shared by the solver modules."""


class SpectralError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(SpectralError, ValueError):
    pass


class SingularJacobianError(SpectralError, ArithmeticError):
    pass


class AssemblyError(SpectralError):
    """Assembled matrix failed a structural check (e.g. not SPD)."""


class EvaluationError(SpectralError):
    """A user callable returned non-finite values."""


class StiffFailure(SpectralError):
    """The time integrator could not continue (step size underflow, Newton divergence)."""


class ConfigError(SpectralError, ValueError):
    pass
