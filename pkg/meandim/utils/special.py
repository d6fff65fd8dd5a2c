"""
Special functions behind the quantile transforms.

This module provides the normal CDF and quantile, the regularized lower
incomplete gamma function and the chi-square CDF and quantile. The scipy
primitives (``ndtr``, ``erfc``, ``gammainc``, ``gammaln``) do the forward
evaluations; the inverses are computed here so that their accuracy contract
is explicit and checked on every call.

All functions accept a scalar or a numpy array. Array input returns an array
of the same shape, scalar input returns a Python float.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from meandim.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)
SQRT2PI = np.sqrt(2.0 * np.pi)

# Rational approximation of the normal quantile, central region
_CENTRAL_NUM = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_CENTRAL_DEN = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
    1.0,
)

# Rational approximation of the normal quantile, tail region
_TAIL_NUM = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549671010466700e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_TAIL_DEN = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
    1.0,
)

# Boundary between the tail and central regions
_P_LOW = 0.02425

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class ToleranceProfile:
    """
    Accuracy contract for the iterative inverses.

    Attributes:
        abs_cdf_roundtrip: Largest accepted |CDF(quantile(u)) - u|
        max_newton_iters: Iteration budget of the Newton refinement
    """

    abs_cdf_roundtrip: float = 1e-10
    max_newton_iters: int = 64

    def __post_init__(self):
        if not self.abs_cdf_roundtrip > 0:
            raise DomainError("abs_cdf_roundtrip must be positive")
        if self.max_newton_iters < 1:
            raise DomainError("max_newton_iters must be at least 1")


DEFAULT_TOLERANCE = ToleranceProfile()


def _as_result(values: np.ndarray):
    """Return a float for 0-d results and the array otherwise."""
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


def _check_probability(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if not np.all((u > 0.0) & (u < 1.0)):
        raise DomainError("probability must lie strictly inside (0, 1)")
    return u


def normal_cdf(x):
    """
    Standard normal cumulative distribution function.

    Args:
        x: Real scalar or array

    Returns:
        Phi(x), same shape as ``x``
    """
    return _as_result(sc.ndtr(np.asarray(x, dtype=float)))


def _lower_normal_quantile(p: np.ndarray) -> np.ndarray:
    """Normal quantile for 0 < p <= 0.5, always nonpositive."""
    x = np.empty_like(p)
    tail = p < _P_LOW
    if np.any(tail):
        q = np.sqrt(-2.0 * np.log(p[tail]))
        x[tail] = np.polyval(_TAIL_NUM, q) / np.polyval(_TAIL_DEN, q)
    central = ~tail
    if np.any(central):
        q = p[central] - 0.5
        r = q * q
        x[central] = q * np.polyval(_CENTRAL_NUM, r) / np.polyval(_CENTRAL_DEN, r)
    # one Halley step against erfc
    with np.errstate(over="ignore", invalid="ignore"):
        e = 0.5 * sc.erfc(-x / SQRT2) - p
        step = e * SQRT2PI * np.exp(0.5 * x * x)
        refined = x - step / (1.0 + 0.5 * x * step)
    return np.where(np.isfinite(refined), refined, x)


def normal_quantile(u):
    """
    Inverse of the standard normal CDF.

    The lower half is computed directly; for ``u > 0.5`` the result is the
    negated lower-half value at ``1 - u``, which is exact in floating point
    for ``u >= 0.5``, so odd symmetry holds bit for bit.

    Args:
        u: Probability or array of probabilities in (0, 1)

    Returns:
        x with Phi(x) = u

    Raises:
        DomainError: If any ``u`` lies outside (0, 1)

    Example:
        >>> round(normal_quantile(0.975), 6)
        1.959964
    """
    u = _check_probability(u)
    flat = np.atleast_1d(u)
    upper = flat > 0.5
    lower = np.where(upper, 1.0 - flat, flat)
    x = _lower_normal_quantile(lower)
    x = np.where(upper, -x, x)
    return _as_result(x.reshape(u.shape))


def gamma_p(a, x):
    """
    Regularized lower incomplete gamma function P(a, x).

    Args:
        a: Shape, positive
        x: Argument, nonnegative

    Returns:
        P(a, x) in [0, 1]

    Raises:
        DomainError: If ``a <= 0`` or ``x < 0``
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.all(a > 0):
        raise DomainError("gamma_p requires a positive shape")
    if not np.all(x >= 0):
        raise DomainError("gamma_p requires a nonnegative argument")
    return _as_result(sc.gammainc(a, x))


def chisq_cdf(df, x):
    """
    Chi-square cumulative distribution function.

    Args:
        df: Degrees of freedom, positive
        x: Nonnegative argument

    Returns:
        P(df / 2, x / 2)
    """
    return gamma_p(0.5 * np.asarray(df, dtype=float), 0.5 * np.asarray(x, dtype=float))


def _gamma_initial_guess(a: float, u: np.ndarray) -> np.ndarray:
    """Starting point for solving P(a, y) = u."""
    if a <= 1.0:
        # lower-tail power series split, accurate where Wilson-Hilferty is not
        t = 1.0 - a * (0.253 + a * 0.12)
        with np.errstate(divide="ignore", invalid="ignore"):
            power = (u / t) ** (1.0 / a)
            tail = 1.0 - np.log1p(-(u - t) / (1.0 - t))
        return np.where(u < t, power, tail)
    df = 2.0 * a
    h = 2.0 / (9.0 * df)
    cube = 1.0 - h + np.asarray(normal_quantile(u)) * np.sqrt(h)
    wilson_hilferty = 0.5 * df * cube**3
    small = np.exp((np.log(u) + sc.gammaln(a + 1.0)) / a)
    return np.where(cube > 0.0, wilson_hilferty, small)


def _refine_gamma_inverse(
    a: float,
    u: np.ndarray,
    y: np.ndarray,
    tolerance: ToleranceProfile,
) -> np.ndarray:
    """Safeguarded Newton iteration for P(a, y) = u."""
    lo = np.zeros_like(y)
    hi = np.full_like(y, np.inf)
    log_norm = sc.gammaln(a)
    for iteration in range(tolerance.max_newton_iters):
        err = sc.gammainc(a, y) - u
        lo = np.where(err < 0, np.maximum(lo, y), lo)
        hi = np.where(err > 0, np.minimum(hi, y), hi)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            log_pdf = (a - 1.0) * np.log(y) - y - log_norm
            proposal = y - err / np.exp(log_pdf)
        outside = ~np.isfinite(proposal) | (proposal <= lo) | (proposal >= hi)
        fallback = np.where(
            np.isfinite(hi), 0.5 * (lo + hi), np.maximum(2.0 * y, _TINY)
        )
        proposal = np.where(outside, fallback, proposal)
        done = (err == 0) | (np.abs(proposal - y) <= 4.0 * _EPS * y)
        y = np.where(err == 0, y, proposal)
        if np.all(done):
            logger.debug("gamma inverse converged after %d iterations", iteration + 1)
            break
    return y


def chisq_quantile(df, u, tolerance: ToleranceProfile = DEFAULT_TOLERANCE):
    """
    Chi-square quantile function.

    Inverts P(df / 2, x / 2) = u starting from Wilson-Hilferty (or a lower-tail
    series for df <= 2) and refining with a bracketed Newton iteration. The
    result is accepted only if the CDF round trip is within
    ``tolerance.abs_cdf_roundtrip``.

    Args:
        df: Degrees of freedom, positive scalar
        u: Probability or array of probabilities in (0, 1)
        tolerance: Accuracy contract

    Returns:
        Quantile(s), same shape as ``u``

    Raises:
        DomainError: If ``df <= 0`` or ``u`` is outside (0, 1)
        ConvergenceError: If the round trip misses the tolerance once the
            iteration budget is spent; ``last_iterate`` holds the quantiles

    Example:
        >>> round(chisq_quantile(2, 0.5), 6)
        1.386294
    """
    df = float(df)
    if not df > 0:
        raise DomainError("chisq_quantile requires positive degrees of freedom")
    u = _check_probability(u)
    flat = np.atleast_1d(u).astype(float)
    a = 0.5 * df
    y = _refine_gamma_inverse(a, flat, _gamma_initial_guess(a, flat), tolerance)
    residual = np.abs(sc.gammainc(a, y) - flat)
    if np.any(residual > tolerance.abs_cdf_roundtrip):
        raise ConvergenceError(
            f"chi-square quantile with df={df} missed the round-trip tolerance "
            f"by {residual.max():.3g} after {tolerance.max_newton_iters} iterations",
            last_iterate=2.0 * y.reshape(u.shape),
        )
    return _as_result((2.0 * y).reshape(u.shape))
