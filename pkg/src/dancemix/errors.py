"""Exception hierarchy shared across the engine.

Each error class maps to a distinct CLI exit code (see cli.EXIT_CODES) so
callers can tell configuration mistakes from data problems from corrupt
weight files without parsing messages.
"""


class DancemixError(Exception):
    """Base class for all engine errors."""


class InvalidArgumentError(DancemixError, ValueError):
    """An argument violates a documented precondition."""


class InsufficientDataError(DancemixError):
    """Not enough input data to produce a result (short streams, empty series)."""


class ConfigError(DancemixError):
    """Engine configuration violates its invariants."""


# --- weight-bundle container -------------------------------------------------

class BundleError(DancemixError):
    """Base class for weight-bundle container problems."""


class BadMagicError(BundleError):
    """File does not start with the DMWB magic."""


class UnsupportedVersionError(BundleError):
    """Container version is newer than this reader understands."""


class TruncatedBundleError(BundleError):
    """File ends mid-record; no partial bundle is returned."""


class ChecksumMismatchError(BundleError):
    """Trailing CRC-32 does not match the payload."""


class ShapeFlowError(BundleError):
    """Bundle tensors do not admit the declared end-to-end forward pass."""


# --- clip library ------------------------------------------------------------

class LibraryError(DancemixError):
    """Base class for clip-library problems."""


class EmptyLibraryError(LibraryError):
    """Library contains no usable clips."""


class IdCollisionError(LibraryError):
    """Two clips map to the same id."""


class UnknownClipError(LibraryError):
    """Referenced clip id is not in the manifest."""


class LibraryLockedError(LibraryError):
    """Curation attempted while a live session holds the library."""


# --- retrieval ---------------------------------------------------------------

class DegenerateVectorError(DancemixError):
    """Cosine similarity asked of a zero-norm vector."""


class PolicyExhaustedError(DancemixError):
    """Retrieval policy excluded every library entry."""


# --- analysis ----------------------------------------------------------------

class UndefinedCorrelationError(DancemixError):
    """Correlation of a constant series is undefined."""


class DegenerateVarianceError(DancemixError):
    """Regression target or predictors carry no variance."""


class NumericalRankError(DancemixError):
    """Covariance structure is rank-deficient beyond ridge repair."""


class EngineError(DancemixError):
    """Runtime failure inside the performance loop."""
