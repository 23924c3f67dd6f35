"""Exception types raised by chanrad operations."""


class ChanradError(ValueError):
    """Base class for all chanrad domain errors."""


class UnsupportedShapeError(ChanradError):
    """Operation requires a different channel potential shape."""


class DegenerateWellError(ChanradError):
    """Channel supports fewer than two bound states at this energy."""


class InvalidHarmonicError(ChanradError):
    """Harmonic order outside the supported range."""


class InsufficientDataError(ChanradError):
    """Not enough input points for the requested diagnostic."""


class DimensionMismatchError(ChanradError):
    """Entry state and matrix elements built from different level structures."""


class EmptyPopulationError(ChanradError):
    """No populated level can radiate at the requested harmonic."""


class InvalidInputError(ChanradError):
    """Scan input grid or parameter outside the valid domain."""


class ConfigError(ChanradError):
    """Aggregated configuration validation failure.

    Collects every problem found in one pass so a bad invocation reports
    all of its mistakes at once.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__(
            "invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems)
        )
