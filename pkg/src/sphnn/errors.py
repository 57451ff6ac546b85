class SphnnError(Exception):
    """Base class for errors raised by this package."""


class NumericError(SphnnError):
    """A numeric pathology: the optimizer could not make progress."""


class StepCapExceeded(NumericError):
    """A single transition needed more steps than the configured cap."""


class NoDecrease(NumericError):
    """A gradient step failed to reduce its loss."""


class StepPrecondition(SphnnError, ValueError):
    """A step was requested on a relation that is already satisfied."""


class TimeLimitExceeded(SphnnError):
    """Cooperative cancellation: the per-task deadline passed."""


class ParseError(SphnnError, ValueError):
    """Malformed input text.  ``offset`` is a byte offset into the input."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset
