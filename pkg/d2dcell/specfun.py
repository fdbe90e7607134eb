""" Numerical kernels: special functions, antiderivative helpers and
adaptive quadrature used by the analytical modules """
import logging
import math
from dataclasses import dataclass
from typing import (
    Callable,
    Iterable,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np  # type: ignore
from scipy import integrate, special  # type: ignore

from d2dcell.constants.defaults import MGF_QUADRATURE
from d2dcell.errors import DomainError, NonConvergenceError, SingularityError

logger = logging.getLogger(__name__)

Number = Union[float, complex]
ArrayLike = Union[float, np.ndarray]

# Failed QUADPACK runs are still accepted when the achieved error is
# within this factor of the requested one (roundoff on nested integrals)
ROUNDOFF_SLACK = 1e3

# Sub-intervals per gap between kinks when a failed run is retried
PIECES_PER_GAP = 8

# QUADPACK refuses tighter relative tolerances when epsabs is 0
QUADPACK_MIN_REL_TOL = 50 * np.finfo(float).eps

# Grid size for branch-continuous evaluation of antiderivatives
BRANCH_GRID = 1025

SERIES_TOL = 1e-16
SERIES_MAX_TERMS = 20000


@dataclass(frozen=True)
class QuadratureSettings:
    """
    Tolerances handed to the adaptive Gauss-Kronrod integrator

    Attributes:
        rel_tol (float): relative tolerance, > 0
        abs_tol (float): absolute tolerance, >= 0
        max_subdivisions (int): subinterval budget, >= 1
    """

    rel_tol: float = MGF_QUADRATURE["rel_tol"]
    abs_tol: float = MGF_QUADRATURE["abs_tol"]
    max_subdivisions: int = MGF_QUADRATURE["max_subdivisions"]

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError(
                f"abs_tol must be non-negative, got {self.abs_tol}"
            )
        if int(self.max_subdivisions) < 1:
            raise ValueError(
                f"max_subdivisions must be >= 1, got {self.max_subdivisions}"
            )

    def tolerance(self, value: Number) -> float:
        """ Error budget for a result of the given magnitude """
        return max(self.abs_tol, self.rel_tol * abs(value))


class QuadratureResult(NamedTuple):
    value: Number
    error: float


def integrate_1d(
    f: Callable[[float], Number],
    lo: float,
    hi: float,
    settings: Optional[QuadratureSettings] = None,
    points: Optional[Iterable[float]] = None,
    is_complex: bool = False,
) -> QuadratureResult:
    """
    Adaptive Gauss-Kronrod quadrature of f over [lo, hi]

    Args:
        f (Callable[[float], Number]): integrand, finite on (lo, hi)
        lo (float): lower limit
        hi (float): upper limit
        settings (QuadratureSettings): tolerances. Defaults to the MGF
            settings
        points (Iterable[float]): interior kinks of the integrand. Points
            outside (lo, hi) are dropped
        is_complex (bool): integrate real and imaginary parts separately
    Raises:
        NonConvergenceError: if the achieved error exceeds the budget
    Returns:
        (QuadratureResult): value and error estimate
    """
    settings = settings or QuadratureSettings()
    if is_complex:
        real = integrate_1d(
            lambda x: complex(f(x)).real, lo, hi, settings, points
        )
        imag = integrate_1d(
            lambda x: complex(f(x)).imag, lo, hi, settings, points
        )
        return QuadratureResult(
            complex(real.value, imag.value), math.hypot(real.error, imag.error)
        )
    if hi == lo:
        return QuadratureResult(0.0, 0.0)
    if hi < lo:
        flipped = integrate_1d(f, hi, lo, settings, points)
        return QuadratureResult(-flipped.value, flipped.error)

    breakpoints = sorted({p for p in (points or ()) if lo < p < hi})
    value, error, message = _quad(f, lo, hi, settings, breakpoints)
    if message is None:
        return QuadratureResult(value, error)
    if not _usable(value, error, settings):
        # a fresh extrapolation table per piece clears most roundoff reports
        value, error = _integrate_pieces(f, lo, hi, settings, breakpoints)
        if not _usable(value, error, settings):
            raise NonConvergenceError(
                f"Quadrature on [{lo}, {hi}] failed: {message}",
                estimate=value,
                error=error,
            )
    logger.debug(
        "Accepting quadrature on [%g, %g] with error %.3g: %s",
        lo,
        hi,
        error,
        message,
    )
    return QuadratureResult(value, error)


def _quad(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    settings: QuadratureSettings,
    breakpoints: Sequence[float] = (),
) -> Tuple[float, float, Optional[str]]:
    """ One QUADPACK run: value, error and the warning message if any """
    epsrel = settings.rel_tol
    if settings.abs_tol <= 0:
        epsrel = max(epsrel, QUADPACK_MIN_REL_TOL)
    out = integrate.quad(
        f,
        lo,
        hi,
        epsabs=settings.abs_tol,
        epsrel=epsrel,
        # QUADPACK needs more subintervals than break points
        limit=max(int(settings.max_subdivisions), len(breakpoints) + 1),
        points=list(breakpoints) or None,
        full_output=1,
    )
    return out[0], out[1], out[3] if len(out) > 3 else None


def _usable(value: float, error: float, settings: QuadratureSettings) -> bool:
    return bool(np.isfinite(value)) and (
        error <= ROUNDOFF_SLACK * settings.tolerance(value)
    )


def _integrate_pieces(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    settings: QuadratureSettings,
    breakpoints: Sequence[float],
) -> Tuple[float, float]:
    """ Integrates between consecutive kinks, each gap cut in
    PIECES_PER_GAP equal parts, and sums """
    edges = [lo, *breakpoints, hi]
    value, error = 0.0, 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        cuts = np.linspace(left, right, PIECES_PER_GAP + 1)
        for a, b in zip(cuts[:-1], cuts[1:]):
            piece, piece_error, _ = _quad(f, float(a), float(b), settings)
            value += piece
            error += piece_error
    return value, error


def integrate_nested(
    f: Callable[[float, float], float],
    outer: Tuple[float, float],
    inner: Callable[[float], Tuple[float, float, Iterable[float]]],
    settings: Optional[QuadratureSettings] = None,
    outer_points: Optional[Iterable[float]] = None,
) -> QuadratureResult:
    """
    Iterated quadrature of f(x, y) for y in inner(x), x in outer

    Args:
        f (Callable[[float, float], float]): integrand f(x, y)
        outer (Tuple[float, float]): limits of x
        inner (Callable): maps x to (y_lo, y_hi, kinks in y)
        settings (QuadratureSettings): shared by both levels
        outer_points (Iterable[float]): kinks in x
    Returns:
        (QuadratureResult)
    """
    settings = settings or QuadratureSettings()

    def inner_integral(x: float) -> float:
        y_lo, y_hi, kinks = inner(x)
        if y_hi <= y_lo:
            return 0.0
        return integrate_1d(
            lambda y: f(x, y), y_lo, y_hi, settings, kinks
        ).value

    return integrate_1d(
        inner_integral, outer[0], outer[1], settings, outer_points
    )


def _gauss_series(a: float, b: float, c: float, x: float) -> float:
    """ Gauss series of 2F1, meant for |x| <= 0.5 """
    total, term = 1.0, 1.0
    for k in range(SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        if term == 0.0 or abs(term) <= SERIES_TOL * abs(total):
            return total
    raise NonConvergenceError(
        f"2F1({a}, {b}; {c}; {x}) series did not converge",
        estimate=total,
        error=abs(term),
    )


def _is_nonpositive_integer(value: float) -> bool:
    return value <= 0 and float(value).is_integer()


def gauss_hypergeometric_2f1(a: float, b: float, c: float, x: float) -> float:
    """
    Gauss hypergeometric function 2F1(a, b; c; x) for real x <= 1.

    Negative arguments go through the Pfaff transformation
    2F1(a,b;c;x) = (1-x)^(-a) 2F1(a,c-b;c;x/(x-1)), which lands in [0, 1).
    Transformed arguments up to 0.5 are summed as a Gauss series; beyond
    that the 1 - x connection formula keeps the series short. When that
    formula degenerates (c - a - b an integer) scipy's hyp2f1 is used.

    Args:
        a (float)
        b (float)
        c (float): must not be a non-positive integer
        x (float): must be <= 1
    Raises:
        DomainError: for x > 1, or c a non-positive integer
        NonConvergenceError: if a series fails to reach tolerance
    Returns:
        (float)
    """
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 undefined for c = {c}")
    if x > 1:
        raise DomainError(f"2F1 argument must be <= 1, got {x}")
    if x == 0:
        return 1.0
    if x == 1:
        if c - a - b <= 0:
            raise DomainError(f"2F1({a}, {b}; {c}; 1) diverges")
        return float(
            special.gamma(c)
            * special.gamma(c - a - b)
            * special.rgamma(c - a)
            * special.rgamma(c - b)
        )

    prefactor = 1.0
    if x < 0:
        prefactor = (1.0 - x) ** (-a)
        b, x = c - b, x / (x - 1.0)

    if x <= 0.5:
        return prefactor * _gauss_series(a, b, c, x)

    gap = c - a - b
    if float(gap).is_integer():
        return prefactor * float(special.hyp2f1(a, b, c, x))

    y = 1.0 - x
    first = (
        special.gamma(c)
        * special.gamma(gap)
        * special.rgamma(c - a)
        * special.rgamma(c - b)
    )
    second = (
        special.gamma(c)
        * special.gamma(-gap)
        * special.rgamma(a)
        * special.rgamma(b)
    )
    value = 0.0
    if first != 0:
        value += first * _gauss_series(a, b, 1.0 - gap, y)
    if second != 0:
        value += second * y ** gap * _gauss_series(c - a, c - b, 1.0 + gap, y)
    return prefactor * float(value)


def upper_incomplete_gamma(a: float, x: float) -> float:
    """
    Upper incomplete gamma function, including negative a

    For a <= 0 the recurrence G(a, x) = (G(a+1, x) - x^a e^-x) / a is run
    down from a value in (0, 1], or from G(0, x) = E1(x) for integer a.

    Args:
        a (float)
        x (float): > 0, or >= 0 when a > 0
    Raises:
        DomainError: if x < 0, or x == 0 with a <= 0
    Returns:
        (float): integral of t^(a-1) e^-t over [x, inf)
    """
    if x < 0 or (x == 0 and a <= 0):
        raise DomainError(f"Gamma({a}, {x}) undefined")
    if a > 0:
        return float(special.gammaincc(a, x) * special.gamma(a))

    if float(a).is_integer():
        steps = int(-a)
        start, value = 0.0, float(special.exp1(x))
    else:
        steps = int(math.floor(-a)) + 1
        start = a + steps
        value = float(special.gammaincc(start, x) * special.gamma(start))

    for step in range(1, steps + 1):
        current = start - step
        value = (value - x ** current * math.exp(-x)) / current
    return value


def _radical(x: ArrayLike, a: Number, b: Number, c: Number) -> np.ndarray:
    """ Principal sqrt((ax+b)^2 + cx) """
    x = np.asarray(x, dtype=float)
    return np.sqrt((a * x + b) ** 2 + c * x + 0j)


def beta1(x: ArrayLike, a: Number, b: Number, c: Number) -> np.ndarray:
    """ ax + b + sqrt((ax+b)^2 + cx), principal branch """
    x = np.asarray(x, dtype=float)
    return a * x + b + _radical(x, a, b, c)


def beta2(x: ArrayLike, a: Number, b: Number, c: Number) -> np.ndarray:
    """ sqrt((ax+b)^2 + c) - b ln(ax + b + sqrt((ax+b)^2 + c)), principal
    branches. The log term is dropped when b = 0 """
    x = np.asarray(x, dtype=float)
    root = np.sqrt((a * x + b) ** 2 + c + 0j)
    if b == 0:
        return root
    return root - b * np.log(a * x + b + root)


def _continuous_log(z: np.ndarray) -> np.ndarray:
    """ Logarithm along a path with the phase unwrapped """
    return np.log(np.abs(z)) + 1j * np.unwrap(np.angle(z))


def _psi1_terms(
    x: np.ndarray,
    a: complex,
    b: complex,
    c: complex,
    root: np.ndarray,
    log_beta: np.ndarray,
    log_l: Optional[np.ndarray],
) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        x_log = np.where(x == 0, 0.0, 0.5 * x ** 2 * log_beta)
    k = 16 * a ** 2 * b ** 2 + 16 * a * b * c + 3 * c ** 2
    value = (
        -(x ** 2) / 8
        + (10 * a * b + 3 * c - 2 * a ** 2 * x) * root / (16 * a ** 3)
        + x_log
    )
    if k != 0 and log_l is not None:
        value = value - k * log_l / (32 * a ** 4)
    return value


def _psi1_logs(
    x: np.ndarray, a: complex, b: complex, c: complex, continuous: bool
) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    if a == 0:
        raise SingularityError("psi1 diverges for a = 0")
    root = _radical(x, a, b, c)
    beta = a * x + b + root
    with np.errstate(divide="ignore", invalid="ignore"):
        log_beta = np.log(beta)
    l_arg = c + 2 * a ** 2 * x + 2 * a * (b + root)
    k = 16 * a ** 2 * b ** 2 + 16 * a * b * c + 3 * c ** 2
    if k == 0:
        return root, log_beta, None
    if np.any(l_arg == 0):
        raise SingularityError(
            f"psi1 log argument vanishes for a={a}, b={b}, c={c}"
        )
    log_l = _continuous_log(l_arg) if continuous else np.log(l_arg)
    return root, log_beta, log_l


def psi1(x: ArrayLike, a: Number, b: Number, c: Number) -> np.ndarray:
    """
    Antiderivative of x ln(beta1(x, a, b, c)) with respect to x.

    Principal branches throughout. Where x = 0 the x^2 ln(beta1) term takes
    its limit 0, and the log term is dropped when its coefficient
    16a^2b^2 + 16abc + 3c^2 vanishes.

    Args:
        x (ArrayLike): evaluation point(s), real
        a (Number): != 0
        b (Number)
        c (Number)
    Raises:
        SingularityError: if a == 0
    Returns:
        (np.ndarray): complex value(s)
    """
    a, b, c = complex(a), complex(b), complex(c)
    x = np.asarray(x, dtype=float)
    root, log_beta, log_l = _psi1_logs(x, a, b, c, continuous=False)
    return _psi1_terms(x, a, b, c, root, log_beta, log_l)


def definite_psi1(
    lo: float, hi: float, a: Number, b: Number, c: Number
) -> complex:
    """
    Psi1(hi) - Psi1(lo) along a continuous branch of the log term

    Args:
        lo (float): lower end of the path, >= 0
        hi (float): upper end of the path
        a (Number)
        b (Number)
        c (Number)
    Returns:
        (complex)
    """
    a, b, c = complex(a), complex(b), complex(c)
    grid = np.linspace(lo, hi, BRANCH_GRID)
    root, log_beta, log_l = _psi1_logs(grid, a, b, c, continuous=True)
    ends = np.array([0, -1])
    values = _psi1_terms(
        grid[ends],
        a,
        b,
        c,
        root[ends],
        log_beta[ends],
        None if log_l is None else log_l[ends],
    )
    return complex(values[1] - values[0])


def definite_beta2(
    lo: float, hi: float, a: Number, b: Number, c: Number
) -> complex:
    """ beta2(hi) - beta2(lo) along a continuous branch of the log term """
    a, b, c = complex(a), complex(b), complex(c)
    grid = np.linspace(lo, hi, BRANCH_GRID)
    root = np.sqrt((a * grid + b) ** 2 + c)
    values = root[[0, -1]]
    if b != 0:
        log_arg = _continuous_log(a * grid + b + root)
        values = values - b * log_arg[[0, -1]]
    return complex(values[1] - values[0])
