"""Exception hierarchy shared by the solver, the model modules and the CLI."""


class DeltaTrainError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(DeltaTrainError, ValueError):
    """Inconsistent or out-of-range inputs."""


class NumericalError(DeltaTrainError, ArithmeticError):
    """A computation produced an unusable result."""


class KernelEvaluationError(NumericalError):
    """The memory kernel returned a non-finite value at some node pair."""

    def __init__(self, k, l, value):
        self.pair = (k, l)
        self.value = value
        super().__init__(
            f"memory kernel is not finite at node pair (t_{k}, t_{l}): {value!r}"
        )


class PhysicalityError(NumericalError):
    """A channel parameter violates complete positivity."""


class PoleError(NumericalError):
    """Division by a vanishing amplitude."""

    def __init__(self, k):
        self.index = k
        super().__init__(f"amplitude vanishes at node k={k}; decay rate has a pole")


class AccuracyError(NumericalError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message, estimate=None, error=None):
        self.estimate = estimate
        self.error = error
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")


class DegeneracyError(NumericalError):
    """Nearly repeated poles make the partial-fraction expansion ill-conditioned."""
