"""Exception taxonomy shared across the package.

Three failure families, kept deliberately small so the command-line
front end can map them onto stable exit codes:

* ConfigError      -- a parameter is invalid, either on its face or
                      against the data it was given (exit code 2).
* FormatError      -- a file on disk is malformed or truncated (exit code 1).
* IntegrityError   -- the data contradicts itself or its declared
                      structure (exit code 3).
"""


class TokenTopicsError(Exception):
    """Base class for all package errors."""


class ConfigError(TokenTopicsError):
    """Invalid parameter value or parameter/data mismatch."""


class InsufficientDataError(ConfigError):
    """The input is too small for the requested operation."""


class FormatError(TokenTopicsError):
    """A file is malformed, truncated, or of an unsupported version."""


class IntegrityError(TokenTopicsError):
    """Internally inconsistent data: bad ids, broken ordering, NaNs."""
