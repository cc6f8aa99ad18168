"""
Exception hierarchy for the OOB forest toolkit

The CLI maps these onto exit codes (see oob_forest.cli).
"""


class OobForestError(Exception):
    """Base class for every error raised on purpose by this package"""


class InvalidArgumentError(OobForestError, ValueError):
    """An argument violates an operation's precondition"""


class EmptySubforestError(InvalidArgumentError):
    """A prediction was requested from an empty set of trees"""


class NoOobInformationError(OobForestError):
    """Every observation was in-bag for every tree, so there is nothing to estimate from"""


class InvalidDatasetError(OobForestError, ValueError):
    """A dataset or CSV file does not satisfy the Dataset invariants"""


class ModelFileError(OobForestError):
    """A serialized forest could not be read back"""


class UsageError(OobForestError):
    """Bad command-line usage"""
