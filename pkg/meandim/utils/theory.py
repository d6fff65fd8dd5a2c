"""
Closed forms, expansions and bounds for mean dimension.

This module collects the deterministic evaluators:

- the product-function formula nu = sum rho_j / (1 - prod (1 - rho_j)) and
  the Gaussian RBF quantities rho_j it is applied to
- ``tune_theta``, which picks the Gaussian scale attaining a given nu
- moment and variance expansions of (z_{1:d} / mu_{1:d})^p, the upper bound
  for the sum of total indices and the asymptotic mean dimension bound
  1 + (p - 1)^2 / 2 * sigma^2_{1:d} / mu_{1:d}^2
- helpers describing where Keister's function sits between its mean
  dimension peaks and troughs
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from meandim.definitions.inputs import (
    CoordinateMoments,
    FiniteDiscrete,
    Law,
    MomentSummary,
    StandardNormal,
    beta_constant,
)
from meandim.exceptions import BracketError, ConvergenceError, DimensionError, DomainError

logger = logging.getLogger(__name__)

# Scan range and resolution of the theta bracket search
THETA_MIN = 1e-9
THETA_MAX = 1e9
THETA_SCAN_PER_DECADE = 10

# Half-width, in phase units, of the peak and trough windows
KEISTER_WINDOW = 0.15


@dataclass(frozen=True)
class RhoVector:
    """
    Per-coordinate variance ratios rho_j = Var(g_j) / E(g_j^2).

    Attributes:
        values: rho_1..rho_d, each in [0, 1]
    """

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise DimensionError("a rho vector needs at least one entry")
        if not all(0.0 <= v <= 1.0 for v in values):
            raise DomainError("rho values must lie in [0, 1]")

    @property
    def d(self) -> int:
        return len(self.values)

    @property
    def zeros(self) -> tuple[bool, ...]:
        """Coordinates the product does not depend on."""
        return tuple(v == 0.0 for v in self.values)

    @property
    def ones(self) -> tuple[bool, ...]:
        """Coordinates whose factor has mean zero."""
        return tuple(v == 1.0 for v in self.values)


def product_mean_dimension(rho: RhoVector | Sequence[float]) -> float:
    """
    Mean dimension of a product of independent factors.

    The denominator 1 - prod(1 - rho_j) is computed as
    -expm1(sum log1p(-rho_j)), which stays accurate when every rho_j is tiny.

    Args:
        rho: RhoVector or a sequence of rho values

    Returns:
        sum_j rho_j / (1 - prod_j (1 - rho_j))

    Raises:
        DomainError: If every rho_j is 0

    Example:
        >>> product_mean_dimension([0.5, 0.5])
        1.3333333333333333
    """
    if not isinstance(rho, RhoVector):
        rho = RhoVector(tuple(rho))
    values = np.asarray(rho.values)
    if not np.any(values > 0):
        raise DomainError("mean dimension is undefined when every rho is 0")
    with np.errstate(divide="ignore"):
        denominator = -math.expm1(float(np.sum(np.log1p(-values))))
    return float(values.sum() / denominator)


def gaussian_rho(theta: float, c: float = 0.0, law: Law | None = None) -> float:
    """
    rho for the factor exp(-(x - c)^2 / theta^2).

    For x ~ N(0, 1), E[exp(-k (x - c)^2)] = (1 + 2k)^(-1/2) exp(-k c^2 / (1 + 2k))
    with k = 1/theta^2 for the first moment and k = 2/theta^2 for the second.
    FiniteDiscrete laws are summed exactly.

    Args:
        theta: Positive scale
        c: Center
        law: StandardNormal (default) or FiniteDiscrete

    Returns:
        rho = 1 - m_1^2 / m_2 in [0, 1]

    Raises:
        DomainError: If ``theta <= 0`` or the law is unsupported
    """
    if not theta > 0:
        raise DomainError("theta must be positive")
    law = law or StandardNormal()
    k1 = 1.0 / theta**2
    k2 = 2.0 / theta**2
    if isinstance(law, StandardNormal):
        # log(m_1^2 / m_2) with the O(k^2) cancellation done algebraically
        a, b = 1.0 + 2.0 * k1, 1.0 + 4.0 * k1
        with np.errstate(divide="ignore"):
            log_ratio = 0.5 * float(np.log1p(-4.0 * k1 * k1 / (a * a)))
        log_ratio -= c * c * 4.0 * k1 * k1 / (a * b)
    elif isinstance(law, FiniteDiscrete):
        squares = (np.asarray(law.values) - c) ** 2
        probs = np.asarray(law.probs)
        log_m1 = float(logsumexp(-k1 * squares, b=probs))
        log_m2 = float(logsumexp(-k2 * squares, b=probs))
        log_ratio = 2.0 * log_m1 - log_m2
    else:
        raise DomainError(f"gaussian_rho does not support {law.kind.value} inputs")
    rho = -math.expm1(log_ratio)
    return min(max(rho, 0.0), 1.0)


def gaussian_product_nu(theta: float, centers: Sequence[float], law: Law | None = None) -> float:
    """Closed-form mean dimension of the Gaussian product with scale ``theta``."""
    return product_mean_dimension(RhoVector(tuple(gaussian_rho(theta, c, law) for c in centers)))


def tune_theta(
    d: int,
    target_nu: float,
    centers: Sequence[float] | None = None,
    tol: float = 1e-8,
    law: Law | None = None,
) -> float:
    """
    Gaussian scale theta whose product function has mean dimension ``target_nu``.

    Scans theta on a log grid over [1e-9, 1e9] for the leftmost sign change of
    nu(theta) - target, then bisects on log theta.

    Args:
        d: Dimension
        target_nu: Target, strictly inside (1, d)
        centers: Centers c_j; zeros when None
        tol: Accepted |nu(theta) - target|
        law: Input law, StandardNormal by default

    Returns:
        theta*

    Raises:
        DomainError: If the target is outside (1, d) or ``tol <= 0``
        BracketError: If no bracket is found in the scan range
    """
    centers = tuple(centers) if centers is not None else (0.0,) * d
    if len(centers) != d:
        raise DimensionError(f"expected {d} centers, got {len(centers)}")
    if not 1.0 < target_nu < d:
        raise DomainError(f"target mean dimension must lie in (1, {d})")
    if not tol > 0:
        raise DomainError("tol must be positive")

    def gap(log_theta: float) -> float:
        rho = [gaussian_rho(math.exp(log_theta), c, law) for c in centers]
        if not any(rho):
            # every factor is flat to double precision; nu tends to 1
            return 1.0 - target_nu
        return product_mean_dimension(rho) - target_nu

    decades = round(math.log10(THETA_MAX / THETA_MIN))
    grid = np.linspace(math.log(THETA_MIN), math.log(THETA_MAX), decades * THETA_SCAN_PER_DECADE + 1)
    gaps = np.array([gap(t) for t in grid])
    if np.any(np.diff(gaps) > 1e-12):
        logger.warning("mean dimension is not monotone in theta over the scan; using the leftmost crossing")
    crossings = np.nonzero(np.sign(gaps[:-1]) * np.sign(gaps[1:]) <= 0)[0]
    if crossings.size == 0:
        raise BracketError(
            f"no theta in [{THETA_MIN:g}, {THETA_MAX:g}] attains nu={target_nu}",
            nu_range=(float(gaps.min() + target_nu), float(gaps.max() + target_nu)),
        )
    i = int(crossings[0])
    if gaps[i] == 0.0:
        return float(math.exp(grid[i]))
    log_theta = optimize.bisect(gap, grid[i], grid[i + 1], xtol=1e-14, maxiter=200)
    achieved = gap(log_theta)
    if abs(achieved) > tol:
        raise ConvergenceError(
            f"bisection reached |nu - target| = {abs(achieved):.3g} > {tol:g}",
            last_iterate=math.exp(log_theta),
        )
    logger.info("theta=%.17g attains nu=%.12g", math.exp(log_theta), achieved + target_nu)
    return float(math.exp(log_theta))


def falling_factorial(p: float, k: int) -> float:
    """(p)_k = p (p - 1) ... (p - k + 1); 1 for k = 0."""
    return math.prod(p - i for i in range(k))


def _ratios(summary: MomentSummary) -> tuple[float, float]:
    """(sigma^2 / mu^2, mu^(3) / mu^3) of the sum."""
    mu = summary.mean
    if not mu > 0:
        raise DomainError("expansions need a positive mean mu_{1:d}")
    return summary.variance / mu**2, summary.mu3 / mu**3


def moment_expansion_p(summary: MomentSummary, p: float) -> float:
    """
    Expansion of E[(z_{1:d} / mu_{1:d})^p] through the d^-2 terms.

    1 + (p)_2/2! s2 + (p)_3/3! s3 + (p)_4/4! 3 s2^2, where s2 = sigma^2/mu^2 and
    s3 = mu^(3)/mu^3.

    Raises:
        DomainError: If ``p >= 6`` or the mean is not positive

    Example:
        >>> moment_expansion_p(InputModel.iid(ChiSquare(1), 10).summary, 2.0)
        1.2
    """
    if p >= 6:
        raise DomainError("the moment expansion needs p < 6")
    s2, s3 = _ratios(summary)
    return (
        1.0
        + falling_factorial(p, 2) / 2.0 * s2
        + falling_factorial(p, 3) / 6.0 * s3
        + falling_factorial(p, 4) / 24.0 * 3.0 * s2 * s2
    )


def leading_variance_term(summary: MomentSummary, p: float) -> float:
    """p^2 sigma^2_{1:d} / mu_{1:d}^2, the leading behaviour of both Var and sum tau-bar^2."""
    s2, _ = _ratios(summary)
    return p * p * s2


def _third_over_variance(summary: MomentSummary) -> float:
    """mu^(3) / (sigma^2 mu), zero for a degenerate sum."""
    if summary.variance == 0:
        return 0.0
    return summary.mu3 / (summary.variance * summary.mean)


def variance_expansion(summary: MomentSummary, p: float) -> float:
    """
    Expansion of Var((z_{1:d} / mu_{1:d})^p).

    p^2 s2 (1 + (p - 1) mu^(3)/(sigma^2 mu) + (p - 1)(3p - 5)/2 s2).

    Raises:
        DomainError: If ``p > 1``
    """
    if p > 1:
        raise DomainError("the variance expansion needs p <= 1")
    s2, _ = _ratios(summary)
    correction = (p - 1.0) * _third_over_variance(summary) + 0.5 * (p - 1.0) * (3.0 * p - 5.0) * s2
    return p * p * s2 * (1.0 + correction)


def tau_sum_bound(summary: MomentSummary, p: float) -> float:
    """
    Upper bound on sum_j tau-bar^2_j for (z_{1:d} / mu_{1:d})^p.

    p^2 s2 (1 + (p - 1)(2p - 3) s2 + (p - 1) mu^(3)/(mu sigma^2)).

    Raises:
        DomainError: If ``p >= 1``
    """
    if p >= 1:
        raise DomainError("the total index bound needs p < 1")
    s2, _ = _ratios(summary)
    correction = (p - 1.0) * (2.0 * p - 3.0) * s2 + (p - 1.0) * _third_over_variance(summary)
    return p * p * s2 * (1.0 + correction)


def theorem_nu_bound(summary: MomentSummary, p: float) -> float:
    """
    Asymptotic mean dimension bound 1 + (p - 1)^2 / 2 * sigma^2_{1:d} / mu_{1:d}^2.

    Raises:
        DomainError: If ``p == 0`` or ``p > 1``

    Example:
        >>> theorem_nu_bound(InputModel.iid(ChiSquare(1), 100).summary, 0.5)
        1.0025
    """
    if p == 0 or p > 1:
        raise DomainError("the mean dimension bound needs a nonzero p <= 1")
    s2, _ = _ratios(summary)
    return 1.0 + 0.5 * (p - 1.0) ** 2 * s2


def prop_const_upper_bound(summary: MomentSummary, p: float) -> float:
    """
    Dimension-free bound beta^p on E[(z_{1:d} / mu_{1:d})^p] for p < 0.

    Args:
        summary: Summary carrying assumption constants
        p: Negative exponent

    Returns:
        beta^p

    Raises:
        DomainError: If ``p >= 0`` or ``d < -p / alpha``
        MissingAssumptionError: If the summary lacks assumption constants
    """
    if p >= 0:
        raise DomainError("the constant bound applies to p < 0")
    beta = beta_constant(summary)
    alpha = summary.assumptions.alpha
    if summary.d < -p / alpha:
        raise DomainError(f"the bound needs d >= {-p / alpha:g}, got d={summary.d}")
    return beta**p


def sum_central_moments(summary: MomentSummary) -> CoordinateMoments:
    """
    Mean and central moments of orders 2..6 of z_{1:d}.

    Cumulants of independent coordinates add, so the moments of the sum
    follow exactly from the coordinate moments.
    """
    totals = np.zeros(5)
    for c in summary.coordinates:
        k2, k3 = c.variance, c.mu3
        k4 = c.mu4 - 3.0 * k2**2
        k5 = c.mu5 - 10.0 * k3 * k2
        k6 = c.mu6 - 15.0 * c.mu4 * k2 - 10.0 * k3**2 + 30.0 * k2**3
        totals += (k2, k3, k4, k5, k6)
    return CoordinateMoments.from_cumulants(summary.mean, tuple(totals))


def normalized_central_moments(summary: MomentSummary) -> tuple[float, ...]:
    """E[(z_{1:d} / mu_{1:d} - 1)^k] for k = 2..6."""
    moments = sum_central_moments(summary)
    return tuple(moments.central(k) / summary.mean**k for k in range(2, 7))


def keister_phase(d: int) -> float:
    """
    Position of sqrt(d)/2 between consecutive multiples of pi, in [0, 1).

    Mean dimension peaks near phase 0 and dips near phase 1/2.
    """
    if d < 1:
        raise DimensionError("d must be positive")
    return math.fmod(0.5 * math.sqrt(d), math.pi) / math.pi


def keister_regime(d: int) -> str:
    """Classify d as a "peak", "trough" or "transition" by ``keister_phase``."""
    phase = keister_phase(d)
    if min(phase, 1.0 - phase) <= KEISTER_WINDOW:
        return "peak"
    if abs(phase - 0.5) <= KEISTER_WINDOW:
        return "trough"
    return "transition"


@dataclass(frozen=True)
class ExpansionReport:
    """
    Theory values for (z_{1:d} / mu_{1:d})^p.

    Evaluators whose domain excludes p leave their field as None.

    Attributes:
        d: Dimension
        p: Exponent
        mean: mu_{1:d}
        variance: sigma^2_{1:d}
        mu3: mu^(3)_{1:d}
        leading_variance: p^2 sigma^2 / mu^2
        moment_expansion: Expansion of E[(z/mu)^p]
        variance_expansion: Expansion of Var((z/mu)^p)
        tau_sum_bound: Upper bound on sum_j tau-bar^2_j
        nu_bound: 1 + (p - 1)^2 / 2 sigma^2 / mu^2
    """

    d: int
    p: float
    mean: float
    variance: float
    mu3: float
    leading_variance: float
    moment_expansion: float | None
    variance_expansion: float | None
    tau_sum_bound: float | None
    nu_bound: float | None


def expansion_report(summary: MomentSummary, p: float) -> ExpansionReport:
    """Evaluate every expansion and bound defined at ``p``."""

    def attempt(evaluator):
        try:
            return evaluator(summary, p)
        except DomainError:
            return None

    return ExpansionReport(
        d=summary.d,
        p=p,
        mean=summary.mean,
        variance=summary.variance,
        mu3=summary.mu3,
        leading_variance=leading_variance_term(summary, p),
        moment_expansion=attempt(moment_expansion_p),
        variance_expansion=attempt(variance_expansion),
        tau_sum_bound=attempt(tau_sum_bound),
        nu_bound=attempt(theorem_nu_bound),
    )
