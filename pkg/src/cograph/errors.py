"""Shared exception types."""


class CographError(Exception):
    """Base class for all engine errors."""


# graph structure
class UnknownNode(CographError):
    pass


class UnknownParent(UnknownNode):
    pass


class UnknownEdge(CographError):
    pass


class EmptyTitle(CographError):
    pass


class EmptyPatch(CographError):
    pass


class DuplicateEdge(CographError):
    pass


class WouldCreateCycle(CographError):
    pass


class CyclicGraph(CographError):
    pass


class MalformedDocument(CographError):
    pass


# ingest / retrieval
class EmptyDocument(CographError):
    pass


class DimensionMismatch(CographError):
    pass


class EmptyTree(CographError):
    pass


class EmbeddingFailure(CographError):
    pass


class SummaryFailure(CographError):
    pass


# agents / provider
class ProviderFailure(CographError):
    pass


class UnparseableClassification(CographError):
    pass


class PlanningFailure(CographError):
    pass
