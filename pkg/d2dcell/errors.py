""" Exceptions raised across d2dcell """
from typing import Optional


class D2DError(Exception):
    """ Base class for every d2dcell specific failure """


class DomainError(D2DError, ValueError):
    """ Argument outside the mathematical domain of a function """


class SingularityError(DomainError):
    """ Expression diverges at the requested parameters """


class DegeneratePositionError(DomainError):
    """ Node placed where the model is undefined, e.g. on top of the BS """


class UnsupportedOrderError(D2DError, ValueError):
    """ Derivative order beyond what the MGF engine supports """


class UndefinedMetricError(D2DError, ValueError):
    """ Metric undefined for the scenario, e.g. a ratio with no DUEs """


class InsufficientSamplesError(D2DError, ValueError):
    """ Monte Carlo request below the sample floor """


class ConfigError(D2DError, ValueError):
    """ Unreadable or invalid run configuration """


class NumericalError(D2DError, ArithmeticError):
    """ Base class for numerical failures (exit code 2 in the CLI) """


class NonConvergenceError(NumericalError):
    """
    Iterative or adaptive routine failed to reach tolerance

    Attributes:
        estimate (Optional[float]): best value reached before giving up
        error (Optional[float]): achieved error estimate
    """

    def __init__(
        self,
        message: str,
        estimate: Optional[complex] = None,
        error: Optional[float] = None,
    ) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BracketError(NumericalError):
    """
    Root finder could not bracket the requested value

    Attributes:
        low_value (float): function value at the lower end of the bracket
        high_value (float): function value at the upper end of the bracket
    """

    def __init__(
        self, message: str, low_value: float, high_value: float
    ) -> None:
        super().__init__(message)
        self.low_value = low_value
        self.high_value = high_value
