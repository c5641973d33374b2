"""Exception types shared across the package."""


class BeamforgeError(Exception):
    """Base class for all package-specific errors."""


class DegenerateInputError(BeamforgeError):
    """An input vector is identically zero or otherwise carries no signal."""


class GridMismatchError(BeamforgeError):
    """Two patterns or masks do not live on the same angle grid."""


class InvalidTargetSpecError(BeamforgeError):
    """A target specification is inconsistent or falls outside the grid."""


class UnsupportedGridError(BeamforgeError):
    """An operation is bound to a specific grid size and got another."""


class ChannelFormatError(BeamforgeError):
    """A channel file could not be parsed or has wrong dimensions."""


class NonFiniteLossError(BeamforgeError):
    """The optimization objective became NaN or infinite."""
