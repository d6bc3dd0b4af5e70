"""Exception hierarchy shared by the library and the CLI."""


class BlurInvError(Exception):
    """Base class for all library errors."""


class DataError(BlurInvError, ValueError):
    """Malformed input data: bad file headers, truncated payloads, invalid images."""


class NumericalError(BlurInvError, ArithmeticError):
    """A computation is undefined for the given input (vanishing mass, non-SPD covariance...)."""
