"""Exception types shared across the package."""


class KpharvestError(Exception):
    """Base class for all package errors."""


class CorpusParseError(KpharvestError):
    """A corpus line could not be parsed; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateDocumentError(KpharvestError):
    """Two corpus records share a doc id or exact token stream."""


class UnknownDocumentError(KpharvestError):
    """A doc_id is not present in the index."""


class ValidationError(KpharvestError):
    """An operation precondition was violated by the caller."""


class JudgmentOrderError(KpharvestError):
    """A judgment targeted a document that is not the pending one."""


class UnknownStrategyError(KpharvestError):
    """A strategy config named no known strategy."""


class UndefinedMetricError(KpharvestError):
    """A metric was requested on an input where it is undefined."""
