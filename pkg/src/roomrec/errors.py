"""Exception hierarchy shared across the package."""


class RoomrecError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RoomrecError):
    """A configuration value violates its constraints."""


class FramingError(RoomrecError):
    """An audio record cannot be segmented into chirp/guard/echo parts."""


class FormatError(RoomrecError):
    """A file or byte stream does not match the expected format."""


class ShapeError(RoomrecError):
    """Tensor or feature dimensions do not line up."""


class PolicyError(RoomrecError):
    """A dataset split policy cannot be satisfied."""


class TrainingError(RoomrecError):
    """Training diverged or could not proceed."""


class CaptureError(RoomrecError):
    """An audio capture source is unavailable or failed."""


class TransportError(RoomrecError):
    """A network operation against the service failed."""
