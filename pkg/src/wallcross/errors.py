"""Exception types. Each maps to one failure mode named in the contracts."""


class WallcrossError(Exception):
    """Base class for all library errors."""


class InputTooLarge(WallcrossError):
    pass


class NotFullDimensional(WallcrossError):
    """The stability condition lies on a wall."""


class NotProper(WallcrossError):
    pass


class CrepantWall(WallcrossError):
    pass


class LabelingError(WallcrossError):
    """omega_plus . e < 0: the two sides must be swapped."""


class BasisSearchFailed(WallcrossError):
    pass


class SectorNotInFan(WallcrossError):
    pass


class SpanFailure(WallcrossError):
    pass


class TagMismatch(WallcrossError):
    pass


class DivisionByPureNilpotent(WallcrossError):
    pass


class NonIntegralPairing(WallcrossError):
    pass


class NonCancellingGamma(WallcrossError):
    pass


class GammaMismatch(WallcrossError):
    pass


class NumericFailure(WallcrossError):
    """Base for failures of floating point routines (CLI exit code 3)."""


class PoleError(NumericFailure):
    pass


class QuadratureFailure(NumericFailure):
    pass


class NoConvergence(NumericFailure):
    pass


class IllConditioned(NumericFailure):
    pass


class WindowExceeded(NumericFailure):
    pass


class ConfigError(WallcrossError):
    """Invalid configuration document; message carries the field and line."""
