"""Exception types shared across the package.

Every error raised by library code derives from :class:`MembosonError` so
callers (and the CLI) can distinguish our failures from genuine bugs.
"""


class MembosonError(Exception):
    """Base class for all package errors."""


class DimensionError(MembosonError, ValueError):
    """A matrix or vector has an invalid or mismatched dimension."""


class PatternError(MembosonError, ValueError):
    """An occupancy pattern violates a precondition (length, photon count)."""


class SizeLimitError(MembosonError, ValueError):
    """A request exceeds the desk-scale guard (factorial/exponential blowup)."""


class StreamFormatError(MembosonError, ValueError):
    """Base class for event-stream parse failures."""


class StreamMagicError(StreamFormatError):
    """Stream file does not start with the expected magic bytes."""


class StreamTruncatedError(StreamFormatError):
    """Stream file is shorter than its header-declared record count."""


class StreamOrderError(StreamFormatError):
    """Record timestamps are not non-decreasing."""


class CalibrationError(MembosonError, ValueError):
    """Delay calibration or drift fitting cannot proceed."""


class UncalibratableChannelError(CalibrationError):
    """One or more channels produced zero coincidences at every delay."""

    def __init__(self, channels):
        self.channels = tuple(channels)
        super().__init__(
            f"no coincidences at any delay offset for channels {self.channels}"
        )


class ConfigError(MembosonError, ValueError):
    """Invalid run configuration (bad channel map, parameters, overlap)."""


class ValidationError(MembosonError, ValueError):
    """Likelihood-ratio validation cannot be evaluated (zero model mass)."""


class AnalysisError(MembosonError, ValueError):
    """Reconstruction or scaling statistics cannot be computed as requested."""
