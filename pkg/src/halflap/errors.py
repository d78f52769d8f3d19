"""Exception types shared across the package."""


class GridMismatchError(ValueError):
    """A field or plan was paired with a grid it does not live on."""


class SpectralProximityError(ValueError):
    """The spectral parameter is on, or too close to, the spectrum."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance.

    ``history`` holds the residual norms recorded along the way.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class ValidationError(ValueError):
    """A generating function or potential failed a sampled check.

    ``offending`` lists the sample points that violated the check.
    """

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)
