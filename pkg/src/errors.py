"""
Exception hierarchy for the depth hand tracker
"""


class TrackerError(Exception):
    """Base class for all errors raised by the tracker library"""


class InvalidInputError(TrackerError, ValueError):
    """Malformed raster, configuration value or argument"""


class NoDepthError(TrackerError):
    """A pixel without a valid depth reading was used where depth is required"""


class PreconditionError(TrackerError):
    """An operation was called with inputs that violate its precondition"""


class UndefinedMetricError(TrackerError):
    """A metric has a zero denominator for the given counts"""


class RegionConfigError(TrackerError):
    """Activity region or step ordering configuration is invalid"""


class ScriptError(TrackerError):
    """A synthetic scene script cannot be rendered or scripted"""


class DatasetError(TrackerError):
    """A trial directory or raster file on disk is missing or corrupt"""


class ModelFormatError(TrackerError):
    """A serialized forest document cannot be decoded"""
