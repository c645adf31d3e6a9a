"""Shared exception types."""


class FiguraError(Exception):
    """Base class for all errors raised by this package."""


class LoadError(FiguraError):
    """A data artifact (embedding file, corpus, inventory) failed to load."""


class UnknownTokenError(FiguraError, KeyError):
    """A token was looked up that is not in the vocabulary."""

    def __init__(self, token: str):
        super().__init__(f"unknown token: {token!r}")
        self.token = token

    def __str__(self) -> str:
        return f"unknown token: {self.token!r}"


class ProtocolError(FiguraError):
    """A dialogue transition was requested that the session state forbids."""


class EventLogError(FiguraError):
    """An event log is internally inconsistent (e.g. dangling follow-up)."""


class UsageError(FiguraError):
    """Bad command-line invocation (unknown flag, missing argument)."""


class DataError(FiguraError):
    """A declared input is missing or malformed (CLI exit code 2)."""
