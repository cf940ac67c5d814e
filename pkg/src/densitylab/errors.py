"""Exception hierarchy shared by every module of the package."""


class DensityLabError(Exception):
    """Base class for all errors raised by densitylab."""


class WindowMismatchError(DensityLabError, ValueError):
    """Two window sets were combined although they live in different windows."""


class InsufficientWindowError(DensityLabError, ValueError):
    """A shift needs source data outside the window the source was restricted to."""


class RangeError(DensityLabError, OverflowError):
    """A window or count exceeds the supported 2**62 range."""


class PrecisionError(DensityLabError, ArithmeticError):
    """A real-parameter computation fell inside its guard band.

    Raised instead of guessing whenever the extended-precision value is
    too close to a decision boundary (an arc endpoint or an integer) to be
    resolved reliably.
    """

    def __init__(self, message, index=None, distance=None):
        super().__init__(message)
        self.index = index
        self.distance = distance


class SpecSyntaxError(DensityLabError, ValueError):
    """A textual set, sequence, family or expression spec failed to parse."""

    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        if text:
            message = f"{message} at position {position}: {text!r}"
        super().__init__(message)
