"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point or shape does not belong to the domain it is used with."""


class ConfigurationError(ValueError):
    """Invalid parameters (resolution, tolerance, beta, ...)."""


class DegenerateMeasureError(ValueError):
    """A measure or weight vector has no mass to normalize."""


class PreconditionError(ValueError):
    """Input violates an operation's stated precondition."""


class UnsupportedDomainError(NotImplementedError):
    """The operation is not defined on this kind of domain."""


class SolverError(RuntimeError):
    """An iterative solve did not reach its tolerance.

    ``residual`` is the last sup-norm residual; ``replay`` carries whatever is
    needed to reproduce the failing input (seed, beta, measure).
    """

    def __init__(self, message, residual=float("nan"), replay=None):
        super().__init__(message)
        self.residual = residual
        self.replay = replay or {}
