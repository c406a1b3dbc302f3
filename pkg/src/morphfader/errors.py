"""Exception hierarchy shared across the package.

Every error carries a short machine-parsable ``code`` so the CLI can emit
single-line ``code: message`` diagnostics and the service can map failures to
HTTP statuses.
"""

from __future__ import annotations


class MorphFaderError(Exception):
    """Base class for all domain errors."""

    code = "error"


class ShapeError(MorphFaderError):
    """Array rank/shape does not match what an operation requires."""

    code = "shape-mismatch"


class RangeError(MorphFaderError):
    """A scalar parameter (e.g. alpha) is outside its allowed interval."""

    code = "range"


class InputError(MorphFaderError):
    """Malformed user input: overlong prompt, bad grid step, bad weight spec."""

    code = "input"


class ConfigurationError(MorphFaderError):
    """Incompatible run parameters (seed/steps/sample-rate mismatches)."""

    code = "config"


class SiteMismatchError(MorphFaderError):
    """Two captures that must come from the same attention site do not."""

    code = "site-mismatch"


class CompletenessError(MorphFaderError):
    """A capture set lacks an entry for a visited attention site."""

    code = "incomplete"


class PersistenceError(MorphFaderError):
    code = "persistence"


class VersionError(PersistenceError):
    """On-disk manifest version is not one this reader understands."""

    code = "version"


class TruncatedBlobError(PersistenceError):
    """A tensor blob's byte length disagrees with its manifest shape."""

    code = "truncated-blob"


class MissingFileError(PersistenceError):
    """A file referenced by (or required for) a capture directory is absent."""

    code = "missing-file"


class DegenerateInputError(MorphFaderError):
    """Input carries no usable signal (e.g. a silent clip)."""

    code = "degenerate-input"


class UndefinedCorrelationError(MorphFaderError):
    """Correlation requested over a zero-variance sequence."""

    code = "undefined-correlation"
