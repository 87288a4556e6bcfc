"""Exception hierarchy shared by all domforge modules.

The CLI maps these onto distinct exit codes: ValidationError for bad
parameters or configs, everything else derived from DomforgeError for
runtime failures.
"""


class DomforgeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DomforgeError):
    """A parameter, config value or input record violates its contract."""


class IngestionError(DomforgeError):
    """An input document could not be read or decoded.

    The message always identifies the offending document (path, or
    path:line for JSON-lines input).
    """


class UnknownPieceError(DomforgeError):
    """decode() was handed a piece that is not in the vocabulary."""


class EmptyDocumentError(DomforgeError):
    """A structured document contained no text at all."""


class CheckpointOutOfRangeError(DomforgeError):
    """A coverage-curve checkpoint exceeds the number of selectable words."""


class PoolTooSmallError(DomforgeError):
    """The negatives pool has fewer documents than requested negatives."""


class DegenerateCorpusError(DomforgeError):
    """The forum dump cannot yield valid negatives (fewer than 2 answered questions)."""


class DuplicateIdError(DomforgeError):
    """Two records in one corpus share an identifier that must be unique."""


class MissingJudgmentError(DomforgeError):
    """A ranked list references a query id with no relevance judgments."""


class UnknownExampleIdError(DomforgeError):
    """A prediction references an example id with no gold answer."""
