"""Exception hierarchy shared by all modules."""


class AdmmTopoError(Exception):
    """Base class for every error raised by this package."""


class GraphError(AdmmTopoError, ValueError):
    pass


class DisconnectedGraph(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class IndexOutOfRange(GraphError):
    pass


class TooSmall(GraphError):
    pass


class GenerationFailed(GraphError):
    pass


class TooLargeForExactConductance(GraphError):
    pass


class ParameterOutOfRange(AdmmTopoError, ValueError):
    pass


class DimensionMismatch(AdmmTopoError, ValueError):
    pass


class NotSymmetric(AdmmTopoError, ValueError):
    pass


class NoConvergence(AdmmTopoError, RuntimeError):
    pass


class NonFiniteState(AdmmTopoError, FloatingPointError):
    pass


class Diverged(AdmmTopoError, RuntimeError):
    pass


class WindowTooNoisy(AdmmTopoError, RuntimeError):
    pass


class OmegaOutOfRange(AdmmTopoError, ValueError):
    pass


class HypothesisViolated(AdmmTopoError, ValueError):
    pass
