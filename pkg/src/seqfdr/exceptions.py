"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so procedures raise the most specific
subtype they can.
"""


class SeqfdrError(Exception):
    """Base class for all package errors."""


class DimensionError(SeqfdrError):
    """Paired vectors or matrices have incompatible shapes."""


class DegenerateSampleError(SeqfdrError):
    """A statistic is undefined because the sample has no spread."""


class InsufficientDataError(SeqfdrError):
    """An estimator was given fewer observations than it requires."""


class NotStoppedError(SeqfdrError):
    """A stopping-stage operation was invoked before the boundary fired."""


class InvalidKError(SeqfdrError):
    """The number of signals passed to the gap rule is out of range."""


class CalibrationError(SeqfdrError):
    """Cutoff calibration exhausted its grid without meeting the targets."""


class SearchFailureError(SeqfdrError):
    """A sample-size search hit its cap without reaching the target."""


class DataError(SeqfdrError):
    """Input data could not be parsed or fails validation."""


class ConfigError(SeqfdrError):
    """A run configuration is internally inconsistent."""
