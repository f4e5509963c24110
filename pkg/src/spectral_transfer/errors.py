"""Exception and warning types raised across the package."""


class GraphError(ValueError):
    """Base class for invalid graph or partition input."""


class NonPositiveMarginal(GraphError):
    pass


class AsymmetryConflict(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class NotNormalized(GraphError):
    pass


class EmptySet(GraphError):
    pass


class OverlappingSets(GraphError):
    pass


class InvalidPartition(GraphError):
    pass


class DisconnectedVertexInRestriction(GraphError):
    pass


class DimensionMismatch(ValueError):
    pass


class EmptySourceClass(GraphError):
    pass


class DegenerateParams(ValueError):
    pass


class ParseError(ValueError):
    pass


class SchemaVersionMismatch(ParseError):
    pass


class SchemaValidationError(ParseError):
    pass


class EigensolverFailure(RuntimeError):
    pass


class Divergence(RuntimeError):
    pass


class DegenerateCutWarning(UserWarning):
    """lambda_k and lambda_{k+1} coincide; the top-k eigenspace is not unique."""


class RankDeficientRepresentation(UserWarning):
    pass
