"""Exception hierarchy with stable machine-readable error codes.

Every error carries a ``code`` token that the CLI prints as the first word
of its single-line diagnostic, so scripted callers can dispatch on it
without parsing prose.
"""


class RawNoiseError(Exception):
    """Base class for all toolkit errors."""

    code = "INTERNAL"


class DomainError(RawNoiseError, ValueError):
    """A numeric argument violates its mathematical domain."""

    code = "DOMAIN"


class ShapeError(RawNoiseError, ValueError):
    """Tensor dimensions are inconsistent with the operation's contract."""

    code = "SHAPE"


class InsufficientDataError(RawNoiseError, ValueError):
    """Too few samples/frames/levels to perform the estimate."""

    code = "INSUFFICIENT_DATA"


class DegenerateDesignError(RawNoiseError, ValueError):
    """Regression design matrix is singular (e.g. all gains identical)."""

    code = "DEGENERATE_DESIGN"


class MissingCalibrationError(RawNoiseError, ValueError):
    """A required calibration component (e.g. ISO slope) is absent."""

    code = "MISSING_CALIBRATION"


class ConfigurationError(RawNoiseError, ValueError):
    """Invalid configuration detected before any work started."""

    code = "CONFIG"


class FileFormatError(RawNoiseError, ValueError):
    """A binary or JSON artifact failed strict validation."""

    code = "BAD_FORMAT"


class BadTensorFileError(FileFormatError):
    code = "BAD_TENSOR_FILE"


class BadManifestError(FileFormatError):
    code = "BAD_MANIFEST"


class BadCheckpointError(FileFormatError):
    code = "BAD_CHECKPOINT"
