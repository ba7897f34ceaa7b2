"""Exception types shared across the package."""


class CshError(Exception):
    """Base class for all package-specific errors."""


class GridMismatch(CshError):
    """Two fields that must share a grid do not."""


class SingularSymbol(CshError):
    """A multiplier undefined at the zero mode was applied to a field with
    nonzero mean and no explicit zero-mode value was supplied."""


class BandOutOfRange(CshError):
    """A dyadic band or cube cover does not fit inside the grid's
    resolvable frequency range."""


class EmptyTrajectory(CshError):
    """A trajectory norm was requested on a trajectory with no states."""


class IndexOutOfRange(CshError):
    """Step index outside the valid range of a trajectory diagnostic."""


class PicardDivergence(CshError):
    """The inner Picard iteration of the twisted-Duhamel step is growing,
    which signals a time step beyond the contraction regime."""


class NonFinite(CshError):
    """A NaN or Inf appeared in an evolved field."""


class NotFound(CshError):
    """Lookup of an unknown identifier in a catalogue."""


class InadmissibleParameters(CshError):
    """Estimate-case parameters violate the hypotheses of the inequality
    being probed."""


class AlphaUnset(CshError):
    """The a-priori monitor needs a potential lower-bound witness alpha,
    but none was set."""


class ConfigError(CshError):
    """A run configuration failed to parse or validate."""


class SnapshotFormatError(CshError):
    """A snapshot file is corrupt or has an unknown format."""
