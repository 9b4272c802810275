"""Exception hierarchy shared by all modules."""


class CrossError(ValueError):
    """Base class for invalid input to the combinatorial layer."""


class DimensionError(CrossError):
    """Operands have incompatible lengths or factor counts."""


class SizeError(CrossError):
    """Requested size is outside the supported range."""


class PreconditionError(CrossError):
    """An operation was called on input that violates its precondition."""


class PathologicalCrossError(CrossError):
    """The cross does not contain the classical N-fold cross.

    Some column of the defining matrix carries no 1, so one coordinate is
    confined to A_k on every branch and no envelope exists.
    """


class DegenerateSetError(CrossError):
    """The set whose extremal function is requested is empty or degenerate."""


class DomainError(ValueError):
    """A point lies outside the region where an expression is defined."""


class OutsideDomainError(DomainError):
    """A radius is at or beyond the outer radius of its factor."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceError(RuntimeError):
    """The grid solver did not reach the requested tolerance."""

    def __init__(self, message, residual, sweeps):
        super().__init__(message)
        self.residual = residual
        self.sweeps = sweeps
