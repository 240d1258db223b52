"""Exception types shared across the package."""


class ColgraphError(Exception):
    """Base class for all errors raised by colgraph."""


class GraphBuildError(ColgraphError):
    """Invalid input while constructing column groups."""


class ClusteringError(ColgraphError):
    """Clustering precondition violated (missing type column, wrong layout)."""


class PredicateSyntaxError(ColgraphError):
    """Malformed predicate text; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownAttributeError(ColgraphError):
    """Predicate references an attribute that does not exist on the edge group."""


class ConfigurationError(ColgraphError):
    """Invalid traversal configuration (c > r, unknown start vertex, ...)."""


class ParseError(ColgraphError):
    """Malformed graph ingestion file; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
