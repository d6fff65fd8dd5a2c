"""
Integrand families.

This module defines the integrands whose mean dimension meandim computes or
estimates. Each family is an immutable ``FunctionSpec`` that evaluates a
single point, a batch of points, and the "hybrid" points x_{-j}:x'_j used by
the Jansen estimator, for every j at once.

Families come in two shapes. Sum-form families depend on x only through
s = sum_j t_j(x_j); their hybrids are cheap updates s - t_j(x_j) + t_j(x'_j).
Product-form families are products of per-coordinate factors; their hybrids
use exclusive prefix and suffix products, so no division is ever needed.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np

from meandim.contrib.families import (
    FUNCTION_FIELD_LOOKUP,
    NAMED_EXPONENTS,
    Z_INPUT_FAMILIES,
    Family,
)
from meandim.definitions.base import BaseDefinition
from meandim.definitions.inputs import InputModel
from meandim.exceptions import ConfigError, DimensionError, DomainError

logger = logging.getLogger(__name__)


class FunctionSpec(BaseDefinition):
    """
    Base class for integrand descriptions.

    Attributes:
        kind: Family of the integrand
        uses_z_inputs: True when the integrand takes z_j >= 0 rather than the
            native inputs x_j of its input model
    """

    kind: ClassVar[Family]
    tag_key: ClassVar[str] = "family"

    @property
    def d(self) -> int:
        raise NotImplementedError

    @property
    def uses_z_inputs(self) -> bool:
        return self.kind in Z_INPUT_FAMILIES

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise DimensionError(
                f"{self.kind.value} expects points of dimension {self.d}, "
                f"got shape {X.shape}"
            )
        return X

    def evaluate(self, x) -> float:
        """
        Evaluate at one point.

        Args:
            x: Sequence of length d

        Returns:
            f(x)

        Raises:
            DimensionError: If the length does not match
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise DimensionError("evaluate expects a single point")
        return float(self.evaluate_batch(x.reshape(1, -1))[0])

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at each row of X (n, d); returns shape (n,)."""
        raise NotImplementedError

    def evaluate_hybrids(self, X: np.ndarray, X_prime: np.ndarray) -> np.ndarray:
        """
        Evaluate every hybrid point.

        Args:
            X: Base points (n, d)
            X_prime: Replacement points (n, d)

        Returns:
            Array (n, d) whose column j is f(x_{-j}:x'_j)
        """
        raise NotImplementedError

    def radial_profile(self) -> Callable[[np.ndarray], np.ndarray]:
        """
        The function of s = ||x||^2 this integrand reduces to.

        Raises:
            DomainError: If the integrand is not radial about the origin
        """
        raise DomainError(f"{self.kind.value} is not a radial function of ||x||^2")


class SumForm(FunctionSpec):
    """Integrands of the form outer(sum_j term(x_j))."""

    def terms(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def outer(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        return self.outer(self.terms(X).sum(axis=1))

    def evaluate_hybrids(self, X: np.ndarray, X_prime: np.ndarray) -> np.ndarray:
        X = self._check(X)
        X_prime = self._check(X_prime)
        terms = self.terms(X)
        totals = terms.sum(axis=1, keepdims=True)
        return self.outer(totals - terms + self.terms(X_prime))


class ProductForm(FunctionSpec):
    """Integrands of the form prod_j factor(x_j)."""

    def factors(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        return np.prod(self.factors(X), axis=1)

    def evaluate_hybrids(self, X: np.ndarray, X_prime: np.ndarray) -> np.ndarray:
        X = self._check(X)
        X_prime = self._check(X_prime)
        factors = self.factors(X)
        left = np.ones_like(factors)
        right = np.ones_like(factors)
        left[:, 1:] = np.cumprod(factors[:, :-1], axis=1)
        right[:, :-1] = np.cumprod(factors[:, :0:-1], axis=1)[:, ::-1]
        return left * right * self.factors(X_prime)


def _power(base: np.ndarray, p: float) -> np.ndarray:
    if p < 0 and np.any(base == 0.0):
        raise DomainError("negative power of a zero sum is singular")
    return base**p


@dataclass(frozen=True)
class Multiquadric(SumForm):
    """
    Generalized multiquadric (a + sum_j (x_j - c_j)^2)^p.

    Attributes:
        p: Nonzero exponent, at most 1
        a: Nonnegative offset
        centers: c_1..c_d
    """

    kind: ClassVar[Family] = Family.MULTIQUADRIC
    p: float = 0.5
    a: float = 0.0
    centers: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if self.p == 0 or self.p > 1:
            raise DomainError("multiquadric exponent must be nonzero and at most 1")
        if self.a < 0:
            raise DomainError("multiquadric offset a must be nonnegative")
        if not self.centers:
            raise DimensionError("multiquadric needs at least one center")

    @classmethod
    def named(cls, name: str, centers, a: float = 0.0) -> "Multiquadric":
        """
        Build a named generalized multiquadric.

        Args:
            name: "inverse_quadratic", "inverse_multiquadric" or "multiquadric"
            centers: c_1..c_d
            a: Offset
        """
        try:
            p = NAMED_EXPONENTS[name]
        except KeyError:
            raise DomainError(f"unknown multiquadric {name!r}") from None
        return cls(p=p, a=a, centers=tuple(centers))

    @property
    def d(self) -> int:
        return len(self.centers)

    def terms(self, X: np.ndarray) -> np.ndarray:
        return (X - np.asarray(self.centers)) ** 2

    def outer(self, s: np.ndarray) -> np.ndarray:
        return _power(self.a + s, self.p)

    def radial_profile(self) -> Callable[[np.ndarray], np.ndarray]:
        if any(self.centers):
            return super().radial_profile()
        return self.outer


@dataclass(frozen=True)
class MultiquadricZ(SumForm):
    """
    (z_{1:d} / mu_{1:d})^p on nonnegative z.

    Attributes:
        p: Nonzero exponent
        d: Number of coordinates
        mean_total: mu_{1:d}, the normalizing sum of coordinate means
    """

    kind: ClassVar[Family] = Family.MULTIQUADRIC_Z
    p: float = 0.5
    d: int = 1
    mean_total: float = 1.0

    def __post_init__(self):
        if self.p == 0:
            raise DomainError("exponent p must be nonzero")
        if self.d < 1:
            raise DimensionError("d must be positive")
        if not self.mean_total > 0:
            raise DomainError("mean_total must be positive")

    @classmethod
    def for_inputs(cls, p: float, inputs: InputModel) -> "MultiquadricZ":
        """Spec normalized by the mean of z_{1:d} under ``inputs``."""
        return cls(p=p, d=inputs.d, mean_total=inputs.summary.mean)

    def terms(self, X: np.ndarray) -> np.ndarray:
        if np.any(X < 0):
            raise DomainError("z inputs must be nonnegative")
        return X

    def outer(self, s: np.ndarray) -> np.ndarray:
        return _power(s / self.mean_total, self.p)

    def radial_profile(self) -> Callable[[np.ndarray], np.ndarray]:
        # s = z_{1:d} equals ||x||^2 when z_j = x_j^2
        return self.outer


@dataclass(frozen=True)
class LogSumZ(SumForm):
    """
    log(z_{1:d} / mu_{1:d}) on nonnegative z.

    Attributes:
        d: Number of coordinates
        mean_total: mu_{1:d}
    """

    kind: ClassVar[Family] = Family.LOG_SUM_Z
    d: int = 1
    mean_total: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError("d must be positive")
        if not self.mean_total > 0:
            raise DomainError("mean_total must be positive")

    @classmethod
    def for_inputs(cls, inputs: InputModel) -> "LogSumZ":
        return cls(d=inputs.d, mean_total=inputs.summary.mean)

    def terms(self, X: np.ndarray) -> np.ndarray:
        if np.any(X < 0):
            raise DomainError("z inputs must be nonnegative")
        return X

    def outer(self, s: np.ndarray) -> np.ndarray:
        if np.any(s == 0.0):
            raise DomainError("log of a zero sum is singular")
        return np.log(s / self.mean_total)

    def radial_profile(self) -> Callable[[np.ndarray], np.ndarray]:
        return self.outer


@dataclass(frozen=True)
class GaussianProduct(ProductForm):
    """
    prod_j exp(-(x_j - c_j)^2 / theta^2).

    Attributes:
        theta: Positive scale
        centers: c_1..c_d
    """

    kind: ClassVar[Family] = Family.GAUSSIAN_PRODUCT
    theta: float = 1.0
    centers: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if not self.theta > 0:
            raise DomainError("theta must be positive")
        if not self.centers:
            raise DimensionError("gaussian product needs at least one center")

    @property
    def d(self) -> int:
        return len(self.centers)

    def factors(self, X: np.ndarray) -> np.ndarray:
        return np.exp(-((X - np.asarray(self.centers)) ** 2) / self.theta**2)


@dataclass(frozen=True)
class Keister(SumForm):
    """
    cos(||x|| / 2).

    Attributes:
        d: Number of coordinates
    """

    kind: ClassVar[Family] = Family.KEISTER
    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError("d must be positive")

    def terms(self, X: np.ndarray) -> np.ndarray:
        return X * X

    def outer(self, s: np.ndarray) -> np.ndarray:
        return np.cos(0.5 * np.sqrt(s))

    def radial_profile(self) -> Callable[[np.ndarray], np.ndarray]:
        return self.outer


@dataclass(frozen=True)
class SyntheticAdditive(SumForm):
    """sum_j x_j, whose mean dimension is 1."""

    kind: ClassVar[Family] = Family.SYNTHETIC_ADDITIVE
    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError("d must be positive")

    def terms(self, X: np.ndarray) -> np.ndarray:
        return X

    def outer(self, s: np.ndarray) -> np.ndarray:
        return s


@dataclass(frozen=True)
class SyntheticProduct(ProductForm):
    """prod_j x_j, whose mean dimension is d for centered inputs."""

    kind: ClassVar[Family] = Family.SYNTHETIC_PRODUCT
    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError("d must be positive")

    def factors(self, X: np.ndarray) -> np.ndarray:
        return X


FUNCTION_CLASSES = {
    Family.MULTIQUADRIC: Multiquadric,
    Family.MULTIQUADRIC_Z: MultiquadricZ,
    Family.GAUSSIAN_PRODUCT: GaussianProduct,
    Family.KEISTER: Keister,
    Family.SYNTHETIC_ADDITIVE: SyntheticAdditive,
    Family.SYNTHETIC_PRODUCT: SyntheticProduct,
    Family.LOG_SUM_Z: LogSumZ,
}


def evaluate(spec: FunctionSpec, x) -> float:
    """
    Evaluate ``spec`` at the point ``x``.

    Example:
        >>> evaluate(Keister(d=3), [0.0, 0.0, 0.0])
        1.0
    """
    return spec.evaluate(x)


def spec_arguments(spec: FunctionSpec, inputs: InputModel, X: np.ndarray) -> np.ndarray:
    """
    Arguments ``spec`` is evaluated at, given native inputs X (n, d).

    z-input families receive ``inputs.z_values(X)``; all others receive X.

    Raises:
        DimensionError: If the spec and the input model disagree on d
    """
    if spec.d != inputs.d:
        raise DimensionError(
            f"{spec.kind.value} has dimension {spec.d}, inputs have {inputs.d}"
        )
    return inputs.z_values(X) if spec.uses_z_inputs else np.asarray(X, dtype=float)


def fold_multiquadric(spec: Multiquadric, x: np.ndarray) -> np.ndarray:
    """
    z values of a multiquadric: z_1 = a + (x_1 - c_1)^2, z_j = (x_j - c_j)^2.

    With these z, evaluating ``spec`` at x equals evaluating
    ``MultiquadricZ(p, d, mean_total=mu)`` at z times mu^p.

    Args:
        spec: Multiquadric
        x: One point (d,) or a batch (n, d)

    Returns:
        z with the shape of ``x``
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.d:
        raise DimensionError(f"expected dimension {spec.d}")
    z = (x - np.asarray(spec.centers)) ** 2
    z[..., 0] += spec.a
    return z


def function_from_dict(data: dict[str, Any]) -> FunctionSpec:
    """
    Build a FunctionSpec from its JSON description.

    A multiquadric may give ``"name"`` (for example "inverse_multiquadric")
    instead of ``"p"``.

    Args:
        data: Dictionary with a ``"family"`` tag and the family's fields

    Returns:
        The FunctionSpec

    Raises:
        ConfigError: On unknown families, unknown fields or missing fields
    """
    data = dict(data)
    try:
        family = Family(data.pop("family"))
    except (KeyError, ValueError) as err:
        raise ConfigError(f"invalid function description {data!r}") from err
    name = data.pop("name", None)
    if name is not None and "p" not in data:
        if name not in NAMED_EXPONENTS:
            raise ConfigError(f"unknown multiquadric name {name!r}")
        data["p"] = NAMED_EXPONENTS[name]
    missing = [key for key in FUNCTION_FIELD_LOOKUP[family] if key not in data]
    if missing:
        raise ConfigError(f"function {family.value} is missing {', '.join(missing)}")
    if "centers" in data:
        data["centers"] = tuple(data["centers"])
    try:
        return FUNCTION_CLASSES[family](**data)
    except TypeError as err:
        raise ConfigError(f"function {family.value}: {err}") from err
