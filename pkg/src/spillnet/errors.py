"""Exception hierarchy shared across the package.

Errors split into three categories that the CLI maps onto exit codes:
configuration problems (exit 1), data problems (exit 2), and estimation
hard failures (exit 3). Everything derives from SpillnetError so callers
can catch the whole family at once.
"""


class SpillnetError(Exception):
    """Base class for all package errors."""


class ConfigError(SpillnetError):
    """Invalid run configuration (bad key, missing file, bad value)."""


# --- data / panel errors -------------------------------------------------

class DataError(SpillnetError):
    """Base class for panel and input-data problems."""


class DuplicateDate(DataError):
    """The same calendar date appears on more than one input row."""


class MissingDate(DataError):
    """A gap in the daily date sequence that the gap-fill policy rejects."""


class NonNumericCell(DataError):
    """A value cell could not be parsed as a finite number."""


class EmptySlice(DataError):
    """A period selection matched no rows of the panel."""


class SeriesTooShort(DataError):
    """Series shorter than the minimum length a statistic requires."""


class SingularRegression(DataError):
    """Auxiliary regression is degenerate (e.g. constant series)."""


class DegenerateSeries(DataError):
    """A column is constant, so conditional-variance estimation is moot."""


# --- estimation / analysis errors ----------------------------------------

class EstimationError(SpillnetError):
    """Base class for model-estimation failures."""


class Untestable(EstimationError):
    """Wald test cannot be run (missing or singular coefficient covariance)."""


class IncompletePairSet(EstimationError):
    """Directional test set does not cover every ordered node pair."""


class EmptyNetwork(SpillnetError):
    """Operation requires at least one edge."""


class TooFewNodes(SpillnetError):
    """Operation requires more defined values than were available."""


class DisjointDomains(SpillnetError):
    """Two curves share no overlapping x-range."""


class ZeroLockdownShift(SpillnetError):
    """Relative rebound is undefined when the baseline shift is zero."""


class NonStationarySpec(SpillnetError):
    """Simulation parameters violate the covariance-stationarity condition."""


class InvalidEdgeList(SpillnetError):
    """Planted-edge list is malformed or not pairwise-composable."""


class MissingPeriod(SpillnetError):
    """Period comparison requires all four named analysis periods."""
