"""Exception hierarchy shared by all modules."""


class SfsyncError(Exception):
    """Base class for every error raised by this package."""


class UnknownNode(SfsyncError, KeyError):
    pass


class UnknownEdge(SfsyncError, KeyError):
    pass


class EmptyGraph(SfsyncError, ValueError):
    pass


class FrozenGraphError(SfsyncError, RuntimeError):
    """Mutation attempted on a frozen snapshot graph."""


class InvalidParams(SfsyncError, ValueError):
    pass


class ZeroTotalWeight(SfsyncError, ValueError):
    pass


class TooFewNodes(SfsyncError, ValueError):
    pass


class GraphTooLarge(SfsyncError, ValueError):
    pass


class NoConvergence(SfsyncError, RuntimeError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InvalidCoupling(SfsyncError, ValueError):
    pass


class DimensionMismatch(SfsyncError, ValueError):
    pass


class NonFiniteState(SfsyncError, FloatingPointError):
    def __init__(self, message, step=None, node=None):
        super().__init__(message)
        self.step = step
        self.node = node


class InsufficientData(SfsyncError, ValueError):
    pass


class DegenerateTail(SfsyncError, ValueError):
    pass


class ZeroVariance(SfsyncError, ValueError):
    pass


class LengthMismatch(SfsyncError, ValueError):
    pass


class MissingInputs(SfsyncError, ValueError):
    pass


class ConfigInvalid(SfsyncError, ValueError):
    pass


class PhaseError(SfsyncError, RuntimeError):
    """A module error raised while processing a specific phase."""

    def __init__(self, phase, cause):
        super().__init__(f"phase {phase}: {type(cause).__name__}: {cause}")
        self.phase = phase
        self.cause = cause
