"""Exception types shared across the package.

Input validation problems raise plain ValueError; the classes here cover
failures that arise during numerics, so callers (and the CLI) can tell the
two apart.
"""


class QDecayError(Exception):
    """Base class for numerical failures."""


class ConvergenceError(QDecayError):
    """An iterative scheme ran out of budget.

    Carries a ``residual`` attribute with the last error measure so the
    failure is diagnosable.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularityError(QDecayError):
    """Evaluation requested exactly at a pole or point charge."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class AccuracyError(QDecayError):
    """A result failed its internal accuracy or sanity check."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value
