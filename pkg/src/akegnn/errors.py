"""Exception types shared across the package."""


class AkeGnnError(Exception):
    """Base class for all package-specific errors."""


class OutOfRangeIndex(AkeGnnError):
    pass


class SelfLoopEdge(AkeGnnError):
    pass


class OverlappingSplits(AkeGnnError):
    pass


class ShapeMismatch(AkeGnnError):
    pass


class TooFewViews(AkeGnnError):
    pass


class EmptyMask(AkeGnnError):
    pass


class StaleCache(AkeGnnError):
    pass


class EmptyMatrix(AkeGnnError):
    pass


class TooFewChannels(AkeGnnError):
    pass


class IndexOutOfRange(AkeGnnError):
    pass


class MTooLarge(AkeGnnError):
    pass


class SpecMismatch(AkeGnnError):
    pass


class InsufficientLabeledNodes(AkeGnnError):
    pass


class MissingFile(AkeGnnError):
    pass


class CountMismatch(AkeGnnError):
    pass


class ParseError(AkeGnnError):
    """Malformed bundle content; message carries file name and line number."""


class UsageError(AkeGnnError):
    """Bad command-line invocation."""


class IoError(AkeGnnError):
    pass
