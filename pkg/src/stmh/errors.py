"""Exception types raised across the package."""


class STMHError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(STMHError, ValueError):
    """A matrix expected to be positive definite failed factorization."""


class DimensionMismatch(STMHError, ValueError):
    pass


class EmptyBlock(STMHError, ValueError):
    pass


class BadBlockSize(STMHError, ValueError):
    pass


class DomainError(STMHError, ValueError):
    """A parameter lies outside the domain where a quantity is defined."""


class NotInPG(STMHError, ValueError):
    """A precision matrix has nonzero entries outside the graph's extended edge set."""


class NotNeighborGraphs(STMHError, ValueError):
    pass


class TooLarge(STMHError, ValueError):
    pass


class NotConverged(STMHError, RuntimeError):
    """PD-completion hit its sweep limit before reaching tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NoSamples(STMHError, ValueError):
    pass


class ParseError(STMHError, ValueError):
    def __init__(self, message, row=None, column=None, token=None):
        super().__init__(message)
        self.row = row
        self.column = column
        self.token = token


class RaggedRows(ParseError):
    pass


class BadK(STMHError, ValueError):
    pass


class ConfigError(STMHError, ValueError):
    """Invalid run configuration; `field` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
