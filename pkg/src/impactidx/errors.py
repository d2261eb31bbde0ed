"""Exception types shared across the package."""


class ImpactIdxError(Exception):
    """Base class for all package errors."""


class ConfigError(ImpactIdxError, ValueError):
    """Invalid configuration or parameters (bad bits, empty corpus, k < 1)."""


class DomainError(ImpactIdxError, ValueError):
    """Input value outside an operation's domain (e.g. non-positive score)."""


class DataError(ImpactIdxError, ValueError):
    """Well-formed input that violates a data invariant (duplicate ids, ...)."""


class ParseError(ImpactIdxError, ValueError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class FormatError(ImpactIdxError, ValueError):
    """Index file is not in the expected binary format."""
