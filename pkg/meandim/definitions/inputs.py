"""
Input distributions and moment summaries.

This module defines the per-coordinate input laws, the ``InputModel`` that
bundles one law per coordinate, and the ``MomentSummary`` of the z-sum that
the theory evaluators consume. Each law knows how to map unit-cube
coordinates to its native values (its quantile transform) and how to report
its mean and central moments of orders 2..6.

For ``NormalShift`` laws the native input is x ~ N(0, 1) and the quantity
summarized is z = offset + (x - c)^2, a shifted noncentral chi-square with one
degree of freedom. All other laws summarize their own values.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, ClassVar

import numpy as np
from scipy import integrate
from scipy import special as sc

from meandim.contrib.families import LAW_FIELD_LOOKUP, LawKind
from meandim.definitions.base import BaseDefinition
from meandim.exceptions import ConfigError, DimensionError, DomainError, MissingAssumptionError
from meandim.utils.special import chisq_quantile, normal_quantile

logger = logging.getLogger(__name__)

# Tolerance on the total probability of a FiniteDiscrete law
PROBABILITY_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CoordinateMoments:
    """
    Mean and central moments of one coordinate's z value.

    Attributes:
        mean: mu_j
        variance: sigma^2_j
        mu3..mu6: Central moments of orders 3 to 6
    """

    mean: float
    variance: float
    mu3: float
    mu4: float
    mu5: float
    mu6: float

    def central(self, k: int) -> float:
        """Central moment of order k, for k = 2..6."""
        return (self.variance, self.mu3, self.mu4, self.mu5, self.mu6)[k - 2]

    @classmethod
    def from_cumulants(cls, mean: float, cumulants: tuple[float, ...]):
        """
        Build moments from the mean and cumulants of orders 2..6.

        Args:
            mean: First moment
            cumulants: (k2, k3, k4, k5, k6)
        """
        k2, k3, k4, k5, k6 = cumulants
        return cls(
            mean=mean,
            variance=k2,
            mu3=k3,
            mu4=k4 + 3.0 * k2**2,
            mu5=k5 + 10.0 * k3 * k2,
            mu6=k6 + 15.0 * k4 * k2 + 10.0 * k3**2 + 15.0 * k2**3,
        )


def _chi_square_cumulants(df: float, noncentrality: float = 0.0) -> tuple[float, ...]:
    """Cumulants of orders 2..6 of a (noncentral) chi-square."""
    return tuple(
        2.0 ** (n - 1) * math.factorial(n - 1) * (df + n * noncentrality)
        for n in range(2, 7)
    )


class Law(BaseDefinition):
    """
    Base class for one-coordinate input laws.

    Subclasses implement ``transform`` (unit interval to native inputs),
    ``z_values`` (native inputs to the summarized z) and ``moments``.
    """

    kind: ClassVar[LawKind]

    def transform(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def z_values(self, x: np.ndarray) -> np.ndarray:
        """Quantity summarized by ``moments``; the native value by default."""
        return np.asarray(x, dtype=float)

    def moments(self) -> CoordinateMoments:
        raise NotImplementedError


@dataclass(frozen=True)
class StandardNormal(Law):
    """x ~ N(0, 1)."""

    kind: ClassVar[LawKind] = LawKind.STANDARD_NORMAL

    def transform(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(normal_quantile(u))

    def moments(self) -> CoordinateMoments:
        return CoordinateMoments(0.0, 1.0, 0.0, 3.0, 0.0, 15.0)


@dataclass(frozen=True)
class NormalShift(Law):
    """
    x ~ N(0, 1) contributing z = offset + (x - c)^2.

    Attributes:
        c: Center of the coordinate
        offset: Nonnegative constant folded into z (the RBF's a, usually on
            the first coordinate only)
    """

    kind: ClassVar[LawKind] = LawKind.NORMAL_SHIFT
    c: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if not self.offset >= 0.0:
            raise DomainError("NormalShift offset must be nonnegative")

    def transform(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(normal_quantile(u))

    def z_values(self, x: np.ndarray) -> np.ndarray:
        return self.offset + (np.asarray(x, dtype=float) - self.c) ** 2

    def moments(self) -> CoordinateMoments:
        cumulants = _chi_square_cumulants(1.0, self.c**2)
        return CoordinateMoments.from_cumulants(1.0 + self.c**2 + self.offset, cumulants)


@dataclass(frozen=True)
class ChiSquare(Law):
    """
    z ~ chi-square with ``df`` degrees of freedom.

    Attributes:
        df: Degrees of freedom, positive
    """

    kind: ClassVar[LawKind] = LawKind.CHI_SQUARE
    df: float = 1.0

    def __post_init__(self):
        if not self.df > 0:
            raise DomainError("ChiSquare needs positive degrees of freedom")

    def transform(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(chisq_quantile(self.df, u))

    def moments(self) -> CoordinateMoments:
        return CoordinateMoments.from_cumulants(self.df, _chi_square_cumulants(self.df))


@dataclass(frozen=True)
class FiniteDiscrete(Law):
    """
    Law with finitely many atoms.

    Attributes:
        values: Support points, finite
        probs: Probabilities, nonnegative and summing to 1 within 1e-12
    """

    kind: ClassVar[LawKind] = LawKind.FINITE_DISCRETE
    values: tuple[float, ...] = ()
    probs: tuple[float, ...] = ()
    _cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        if not values or len(values) != len(probs):
            raise DomainError("FiniteDiscrete needs matching, nonempty values and probs")
        if not all(math.isfinite(v) for v in values):
            raise DomainError("FiniteDiscrete values must be finite")
        if any(p < 0 for p in probs):
            raise DomainError("FiniteDiscrete probabilities must be nonnegative")
        if abs(math.fsum(probs) - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise DomainError("FiniteDiscrete probabilities must sum to 1")
        object.__setattr__(self, "_cumulative", np.cumsum(probs))

    @classmethod
    def uniform(cls, values) -> "FiniteDiscrete":
        """Equal weight on each of ``values``."""
        values = tuple(values)
        return cls(values, tuple([1.0 / len(values)] * len(values)))

    @classmethod
    def gauss_hermite(cls, k: int) -> "FiniteDiscrete":
        """
        k-point discretization of N(0, 1).

        Uses probabilists' Gauss-Hermite nodes; the law matches the normal
        moments up to order 2k - 1.
        """
        nodes, weights = np.polynomial.hermite_e.hermegauss(k)
        probs = weights / weights.sum()
        # hermegauss is symmetric up to rounding; enforce it exactly
        nodes = 0.5 * (nodes - nodes[::-1])
        probs = 0.5 * (probs + probs[::-1])
        return cls(tuple(nodes), tuple(probs / probs.sum()))

    @property
    def size(self) -> int:
        return len(self.values)

    def transform(self, u: np.ndarray) -> np.ndarray:
        # bucket i holds u in (F_{i-1}, F_i]; ties go to the lower index
        index = np.searchsorted(self._cumulative, u, side="left")
        return np.asarray(self.values)[np.minimum(index, self.size - 1)]

    def moments(self) -> CoordinateMoments:
        values = np.asarray(self.values)
        probs = np.asarray(self.probs)
        mean = float(np.dot(probs, values))
        centered = values - mean
        central = [float(np.dot(probs, centered**k)) for k in range(2, 7)]
        return CoordinateMoments(mean, *central)


LAW_CLASSES = {
    LawKind.STANDARD_NORMAL: StandardNormal,
    LawKind.NORMAL_SHIFT: NormalShift,
    LawKind.CHI_SQUARE: ChiSquare,
    LawKind.FINITE_DISCRETE: FiniteDiscrete,
}


def law_from_dict(data: dict[str, Any]) -> Law:
    """
    Build a law from its JSON description.

    Args:
        data: Dictionary with a ``"kind"`` tag and the law's fields

    Returns:
        The law

    Raises:
        ConfigError: On unknown kinds or missing fields
    """
    data = dict(data)
    try:
        kind = LawKind(data.pop("kind"))
    except (KeyError, ValueError) as err:
        raise ConfigError(f"invalid law description {data!r}") from err
    missing = [name for name in LAW_FIELD_LOOKUP[kind] if name not in data]
    if missing:
        raise ConfigError(f"law {kind.value} is missing {', '.join(missing)}")
    try:
        return LAW_CLASSES[kind](**data)
    except TypeError as err:
        raise ConfigError(f"law {kind.value}: {err}") from err


def noncentral_chi1_moments(c: float) -> tuple[float, float, float, float]:
    """
    Mean, variance and third and fourth central moments of (x - c)^2, x ~ N(0, 1).

    Args:
        c: Shift

    Returns:
        (mu, sigma^2, mu^(3), mu^(4))

    Example:
        >>> noncentral_chi1_moments(1.0)
        (2.0, 6.0, 32.0, 348.0)
    """
    c2 = float(c) ** 2
    return (
        1.0 + c2,
        2.0 * (1.0 + 2.0 * c2),
        8.0 * (1.0 + 3.0 * c2),
        12.0 * (1.0 + 2.0 * c2) ** 2 + 48.0 * (1.0 + 4.0 * c2),
    )


def negative_moment(law: Law, alpha: float) -> float:
    """
    M_alpha = E[z^-alpha] for one coordinate.

    Closed forms cover chi-square laws and unshifted NormalShift; shifted
    normals are integrated numerically; FiniteDiscrete laws are summed.

    Args:
        law: Coordinate law
        alpha: Positive exponent

    Returns:
        E[z^-alpha], possibly ``inf``

    Raises:
        DomainError: If ``alpha <= 0`` or the law has no such moment
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if isinstance(law, FiniteDiscrete):
        values = np.asarray(law.values)
        probs = np.asarray(law.probs)
        if np.any(values[probs > 0] <= 0):
            raise DomainError("negative moments need strictly positive support")
        return float(np.dot(probs, values ** (-alpha)))
    if isinstance(law, ChiSquare) or (
        isinstance(law, NormalShift) and law.c == 0.0 and law.offset == 0.0
    ):
        half_df = 0.5 * (law.df if isinstance(law, ChiSquare) else 1.0)
        if alpha >= half_df:
            raise DomainError(f"E[z^-alpha] diverges for alpha >= {half_df}")
        return float(
            np.exp(-alpha * np.log(2.0) + sc.gammaln(half_df - alpha) - sc.gammaln(half_df))
        )
    if isinstance(law, NormalShift):
        if law.offset == 0.0 and alpha >= 0.5:
            raise DomainError("E[z^-alpha] diverges for alpha >= 1/2")

        def integrand(x):
            return (law.offset + (x - law.c) ** 2) ** (-alpha) * np.exp(-0.5 * x * x)

        # split at the center, where the integrand may be singular
        pieces = [(-np.inf, law.c - 1.0), (law.c - 1.0, law.c), (law.c, law.c + 1.0), (law.c + 1.0, np.inf)]
        value = math.fsum(integrate.quad(integrand, lo, hi, limit=200)[0] for lo, hi in pieces)
        return float(value / np.sqrt(2.0 * np.pi))
    raise DomainError(f"no negative moment for {law.kind.value} inputs")


@dataclass(frozen=True)
class AssumptionConstants:
    """
    Constants of the bounded-mean and negative-moment assumptions.

    Attributes:
        alpha: Negative moment order
        m_alpha: Bound on E[z_j^-alpha] over coordinates
        lam: Bound on |central moments| of orders 2..6 over coordinates
        mu_lower: Smallest coordinate mean
        mu_upper: Largest coordinate mean
        sigma2_upper: Largest coordinate variance
    """

    alpha: float
    m_alpha: float
    lam: float
    mu_lower: float
    mu_upper: float
    sigma2_upper: float


@dataclass(frozen=True)
class MomentSummary:
    """
    Per-coordinate moments of z and their sums over coordinates.

    Attributes:
        coordinates: One CoordinateMoments per coordinate
        assumptions: Optional assumption constants for the bound evaluators
    """

    coordinates: tuple[CoordinateMoments, ...]
    assumptions: AssumptionConstants | None = None

    def __post_init__(self):
        if not self.coordinates:
            raise DimensionError("a moment summary needs at least one coordinate")
        if any(c.variance < 0 for c in self.coordinates):
            raise DomainError("coordinate variances must be nonnegative")

    @property
    def d(self) -> int:
        return len(self.coordinates)

    @cached_property
    def mean(self) -> float:
        """mu_{1:d}."""
        return sum(c.mean for c in self.coordinates)

    @cached_property
    def variance(self) -> float:
        """sigma^2_{1:d}."""
        return sum(c.variance for c in self.coordinates)

    def central_sum(self, k: int) -> float:
        """mu^(k)_{1:d}, the sum of coordinate central moments of order k."""
        return sum(c.central(k) for c in self.coordinates)

    @property
    def mu3(self) -> float:
        return self.central_sum(3)

    @property
    def mu4(self) -> float:
        return self.central_sum(4)

    def concat(self, other: "MomentSummary") -> "MomentSummary":
        """Summary of the concatenated coordinates; assumptions are dropped."""
        return MomentSummary(self.coordinates + other.coordinates)

    def with_assumptions(self, alpha: float, m_alpha: float) -> "MomentSummary":
        """
        Attach assumption constants derived from the coordinates.

        Args:
            alpha: Negative moment order
            m_alpha: Bound on E[z_j^-alpha]

        Returns:
            A copy carrying AssumptionConstants
        """
        lam = max(abs(c.central(k)) for c in self.coordinates for k in range(2, 7))
        constants = AssumptionConstants(
            alpha=alpha,
            m_alpha=m_alpha,
            lam=lam,
            mu_lower=min(c.mean for c in self.coordinates),
            mu_upper=max(c.mean for c in self.coordinates),
            sigma2_upper=max(c.variance for c in self.coordinates),
        )
        return MomentSummary(self.coordinates, constants)


def beta_constant(summary: MomentSummary) -> float:
    """
    beta = 1 / (mu_lower * M_alpha^(1/alpha)).

    Args:
        summary: Summary carrying assumption constants

    Returns:
        beta

    Raises:
        MissingAssumptionError: If the constants are absent or unusable
    """
    constants = summary.assumptions
    if constants is None:
        raise MissingAssumptionError("summary carries no assumption constants")
    if not (constants.alpha > 0 and math.isfinite(constants.m_alpha) and constants.mu_lower > 0):
        raise MissingAssumptionError(
            "beta needs alpha > 0, finite M_alpha and a positive smallest mean"
        )
    return 1.0 / (constants.mu_lower * constants.m_alpha ** (1.0 / constants.alpha))


@dataclass(frozen=True)
class InputModel:
    """
    Independent per-coordinate input laws.

    Attributes:
        laws: One law per coordinate
    """

    laws: tuple[Law, ...]

    def __post_init__(self):
        object.__setattr__(self, "laws", tuple(self.laws))
        if not self.laws:
            raise DimensionError("an input model needs at least one coordinate")

    @classmethod
    def iid(cls, law: Law, d: int) -> "InputModel":
        """``d`` coordinates sharing ``law``."""
        if d < 1:
            raise DimensionError("d must be positive")
        return cls((law,) * d)

    @property
    def d(self) -> int:
        return len(self.laws)

    @property
    def is_finite(self) -> bool:
        return all(isinstance(law, FiniteDiscrete) for law in self.laws)

    @cached_property
    def summary(self) -> MomentSummary:
        """Moment summary of the z values."""
        return MomentSummary(tuple(law.moments() for law in self.laws))

    def concat(self, other: "InputModel") -> "InputModel":
        return InputModel(self.laws + other.laws)

    def __add__(self, other: "InputModel") -> "InputModel":
        return self.concat(other)

    def _column_groups(self) -> dict[Law, list[int]]:
        groups: dict[Law, list[int]] = {}
        for j, law in enumerate(self.laws):
            groups.setdefault(law, []).append(j)
        return groups

    def transform(self, u: np.ndarray) -> np.ndarray:
        """
        Map unit-cube points to native inputs.

        Args:
            u: Array (n, d) in (0, 1)

        Returns:
            Array (n, d) of native inputs
        """
        u = np.asarray(u, dtype=float)
        if u.ndim != 2 or u.shape[1] != self.d:
            raise DimensionError(f"expected points of dimension {self.d}")
        out = np.empty_like(u)
        for law, columns in self._column_groups().items():
            out[:, columns] = law.transform(u[:, columns])
        return out

    def z_values(self, x: np.ndarray) -> np.ndarray:
        """Map native inputs (n, d) to z values (n, d)."""
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for law, columns in self._column_groups().items():
            out[:, columns] = law.z_values(x[:, columns])
        return out

    def assumption_constants(self, alpha: float) -> MomentSummary:
        """
        Summary with assumption constants for negative moment order ``alpha``.

        Args:
            alpha: Positive order with finite E[z_j^-alpha] for every coordinate

        Returns:
            MomentSummary carrying AssumptionConstants
        """
        m_alpha = max(negative_moment(law, alpha) for law in set(self.laws))
        return self.summary.with_assumptions(alpha, m_alpha)

    def to_dict(self) -> dict[str, Any]:
        """JSON form: a list of law descriptions."""
        return {"laws": [law.to_dict() for law in self.laws]}

    @classmethod
    def from_dict(cls, data: dict[str, Any] | list) -> "InputModel":
        """
        Read an input model from JSON.

        Accepts ``{"laws": [...]}``, a bare list of laws, or
        ``{"iid": <law>, "d": <int>}``.

        Raises:
            ConfigError: On malformed descriptions
        """
        if isinstance(data, list):
            return cls(tuple(law_from_dict(item) for item in data))
        if "iid" in data:
            if "d" not in data:
                raise ConfigError("an iid input model needs 'd'")
            return cls.iid(law_from_dict(data["iid"]), int(data["d"]))
        if "laws" in data:
            return cls(tuple(law_from_dict(item) for item in data["laws"]))
        raise ConfigError(f"invalid input model description {data!r}")
