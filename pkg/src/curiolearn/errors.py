"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 1, PackFormatError
(including PackCorruptionError) and I/O failures -> 2.
"""


class CuriolearnError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CuriolearnError):
    """Input data or configuration violates an invariant."""


class PackFormatError(CuriolearnError):
    """A binary file does not conform to the expected layout."""


class PackCorruptionError(PackFormatError):
    """A binary file is structurally valid up to a point but truncated or
    has trailing garbage."""


class NoModelError(CuriolearnError):
    """A query needs at least one learned centroid or class (cold start)."""


class DivergenceError(CuriolearnError):
    """Training produced a non-finite loss."""
