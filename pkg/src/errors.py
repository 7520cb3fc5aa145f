"""
Exception hierarchy shared by all sic-equalizer packages.
"""


class SicEqError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SicEqError, ValueError):
    """Invalid or inconsistent experiment configuration."""


class AlphabetError(SicEqError, ValueError):
    """Unsupported modulation alphabet request."""


class ChannelError(SicEqError, ValueError):
    """Invalid channel specification or frame/channel mismatch."""


class PartitionError(SicEqError, ValueError):
    """Block length not compatible with the number of SIC stages."""


class StateSpaceTooLargeError(SicEqError):
    """Trellis or enumeration size above the configured cap."""


class ShapeMismatchError(SicEqError, ValueError):
    """Array shapes do not match the model topology."""


class TrainingDivergedError(SicEqError):
    """Training loss became non-finite."""


class CheckpointError(SicEqError):
    """Corrupt, incompatible or unreadable checkpoint file."""
