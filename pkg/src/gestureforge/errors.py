"""Exception types shared across the package."""


class GestureForgeError(Exception):
    """Base class for all package errors."""


class DegenerateHand(GestureForgeError):
    """Landmarks collapsed: the wrist-to-reference distance is below threshold."""


class LengthMismatch(GestureForgeError):
    """Paired lists (e.g. predicted vs. truth frames) differ in length."""


class ParseError(GestureForgeError):
    """A landmark file record is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShapeMismatch(GestureForgeError):
    """Tensor shapes are incompatible for the requested operation."""


class BatchTooSmall(GestureForgeError):
    """Batch normalization in training mode needs at least 2 rows."""


class UnknownCharacter(GestureForgeError):
    """A word contains a character outside the builtin alphabet."""


class UnknownPose(GestureForgeError):
    """A requested pose name is not in the builtin set."""


class InvalidPose(GestureForgeError):
    """Pose angles or bone lengths violate their ranges."""


class InvalidArgument(GestureForgeError):
    """A caller-supplied argument violates a precondition."""


class NoHands(GestureForgeError):
    """An operation requiring at least one hand received none."""


class InsufficientData(GestureForgeError):
    """A class has fewer samples than the requested K."""


class LabelMismatch(GestureForgeError):
    """Sample labels do not match the model's label map."""


class ChecksumError(GestureForgeError):
    """Model file payload does not match its checksum."""


class VersionError(GestureForgeError):
    """Model file format version is not supported."""


class IoError(GestureForgeError):
    """File could not be read or written."""
