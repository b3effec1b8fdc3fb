"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its tolerance.

    Parameters
    ----------
    message : str
        Human-readable diagnosis.
    estimate : float or complex, optional
        Best available estimate of the requested quantity.
    error : float, optional
        Error bound attached to ``estimate``.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error

    def __str__(self):
        msg = super().__str__()
        if self.estimate is not None:
            msg += f" (best estimate {self.estimate!r}, error bound {self.error!r})"
        return msg
