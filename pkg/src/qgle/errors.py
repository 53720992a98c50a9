"""Exception types shared across the package."""


class QgleError(Exception):
    """Base class for all package-specific errors."""


class DivergentIntegralError(QgleError):
    """Requested quantity is cutoff-divergent and has no finite value."""


class QuadratureError(QgleError):
    """A numerical quadrature failed to reach the requested accuracy."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class ConvergenceError(QgleError):
    """An iterative limit procedure did not converge."""

    def __init__(self, message, iterates=None):
        super().__init__(message)
        self.iterates = iterates


class CoefficientSingularityError(QgleError):
    """A transport coefficient is evaluated at a pole (zero of h(t))."""


class BathResolutionError(QgleError):
    """A discretized bath cannot represent the requested kernel or horizon."""


class SolverStabilityError(QgleError):
    """A time stepper violated a stability, positivity or mass constraint."""

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt
