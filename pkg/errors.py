"""
Exception types raised by the service layer.
"""


class RejectedInputError(ValueError):
    """Input violates an operation's preconditions (dimension, range, party...)."""


class NegativeProbabilityError(RejectedInputError):
    """A joint probability came out below the clipping threshold."""


class NonFiniteObjectiveError(RejectedInputError):
    """The optimizer evaluated the objective to NaN or infinity."""


class ExperimentIOError(OSError):
    """Experiment output could not be written."""
