"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` and a process
``exit_code`` so the CLI can report failures uniformly.
"""
from __future__ import annotations


class MetaSynthError(Exception):
    code = "ERROR"
    exit_code = 10


class InvalidArgumentError(MetaSynthError, ValueError):
    code = "INVALID_ARGUMENT"
    exit_code = 11


class NotFoundError(MetaSynthError, LookupError):
    code = "NOT_FOUND"
    exit_code = 12


class ConfigError(MetaSynthError, ValueError):
    code = "CONFIG_ERROR"
    exit_code = 13

    def __init__(self, key: str, constraint: str):
        super().__init__(f"{key}: {constraint}")
        self.key = key
        self.constraint = constraint


class LibraryNotFoundError(MetaSynthError, FileNotFoundError):
    code = "LIBRARY_NOT_FOUND"
    exit_code = 14


class LibraryFormatError(MetaSynthError, ValueError):
    code = "LIBRARY_FORMAT"
    exit_code = 15

    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno


class BuildError(MetaSynthError):
    code = "BUILD_FAILED"
    exit_code = 16


class TransportError(MetaSynthError):
    """Non-2xx response or network failure; retriable."""

    code = "TRANSPORT"
    exit_code = 17
    retriable = True


class ClientParseError(MetaSynthError):
    code = "CLIENT_PARSE"
    exit_code = 18


class GenerationFormatError(MetaSynthError):
    code = "GENERATION_FORMAT"
    exit_code = 19


class ExpansionEmptyError(MetaSynthError):
    code = "EXPANSION_EMPTY"
    exit_code = 20


class NoCoverageError(MetaSynthError):
    """Expansion produced no query that retrieves the target page."""

    code = "NO_COVERAGE"
    exit_code = 21

    def __init__(self, message: str, trace: dict | None = None):
        super().__init__(message)
        self.trace = trace or {}


class InputError(MetaSynthError, ValueError):
    """Malformed page, seed or rankings input file."""

    code = "INPUT_ERROR"
    exit_code = 22
