"""Shared error types.

Every domain error carries a stable machine-readable ``code`` so the HTTP
gateway and the CLI can map failures without string matching.
"""

from __future__ import annotations


class GreenBasketError(Exception):
    """Base class for all domain errors."""

    code = "error"


class ValidationError(GreenBasketError):
    """An input violated a documented precondition or invariant.

    ``field`` names the offending field when one can be identified.
    """

    code = "validation_error"

    def __init__(self, message: str, *, field: str | None = None):
        super().__init__(message)
        self.field = field


class ConfigError(GreenBasketError):
    """A configuration document is missing, unreadable or malformed."""

    code = "config_error"

    def __init__(self, message: str, *, source: str | None = None):
        super().__init__(message)
        self.source = source


class NotFoundError(GreenBasketError):
    """A referenced entity does not exist."""

    code = "not_found"


class AuthorizationError(GreenBasketError):
    """The caller is not allowed to touch the referenced entity."""

    code = "forbidden"
