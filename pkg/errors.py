"""Exception hierarchy shared by every package.

The CLI maps NumericalFailure subclasses to exit code 3 and every other
LabError to exit code 2.
"""


class LabError(Exception):
    """Base class for all laboratory errors."""


class InvalidArgumentError(LabError, ValueError):
    pass


class UnsupportedProblemError(LabError):
    pass


class InvalidDiffusionError(LabError, ValueError):
    pass


class IncomparableConfigsError(LabError, ValueError):
    pass


class UsageError(LabError):
    pass


class NumericalFailure(LabError):
    """A computation could not produce a trustworthy number."""


class SingularSystemError(NumericalFailure):
    pass


class NoConvergenceError(NumericalFailure):
    pass


class NumericalInconsistencyError(NumericalFailure):
    pass
