"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A parameter lies outside its admissible range."""


class ModelDomainError(ValueError):
    """The channel model is undefined for the requested parameters (e.g. alpha <= 2)."""


class NoRelayError(RuntimeError):
    """No receiver can exist in the selection region."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its tolerance.

    ``estimate`` holds the best value obtained before giving up.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
