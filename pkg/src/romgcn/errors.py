"""Exception types shared across the package."""


class RomGcnError(Exception):
    """Base class for all package errors."""


class DegenerateVector(RomGcnError):
    """A vector with near-zero norm was used where a direction is required."""


class CoincidentNodes(RomGcnError):
    """Two nodes occupy the same position, so no pair descriptor exists."""


class MissingDirection(RomGcnError):
    """A descriptor that needs direction vectors got a direction-less node."""


class ParseError(RomGcnError):
    """A structure file could not be parsed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class CheckpointError(RomGcnError):
    """A checkpoint stream is corrupt, truncated, or has the wrong version."""


class ConfigError(RomGcnError):
    """Invalid model or run configuration."""
