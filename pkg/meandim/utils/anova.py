"""
Exact functional ANOVA on finite product grids.

When every input coordinate has finite support, all expectations are finite
weighted sums over the product grid and the ANOVA decomposition can be
computed exactly. This module evaluates the integrand once on the whole grid
and then derives every effect f_u by applying, axis by axis, either the
conditional expectation E_j (coordinate j not in u) or its complement
I - E_j (coordinate j in u). The result equals the inclusion-exclusion formula
f_u = sum_{v subset u} (-1)^{|u - v|} E[f | x_v] and reuses every partial
expectation along the way.

Subsets u are bitmasks with bit j set for coordinate j.
"""

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from meandim.definitions import MAX_GRID_SIZE
from meandim.definitions.functions import FunctionSpec, spec_arguments
from meandim.definitions.inputs import InputModel
from meandim.exceptions import (
    DegenerateVarianceError,
    DimensionError,
    DomainError,
    GridTooLargeError,
)

logger = logging.getLogger(__name__)

MAX_ORACLE_DIMENSION = 20

# Grid rows evaluated per call of evaluate_batch
_EVALUATION_CHUNK = 2**16

# Variance below this fraction of E[f^2] is treated as zero
_DEGENERATE_RELATIVE = 1e-24


@dataclass(frozen=True, eq=False)
class ProductGrid:
    """
    An integrand tabulated on a finite product grid.

    Attributes:
        values: Tensor of f values, one axis per coordinate
        probs: Per-axis probability vectors
    """

    values: np.ndarray
    probs: tuple[np.ndarray, ...]

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return self.values.size

    @cached_property
    def weights(self) -> np.ndarray:
        """Product-measure weight of every grid point."""
        return reduce(np.multiply.outer, self.probs)

    def expectation(self, tensor: np.ndarray) -> float:
        """
        Expectation of a tensor broadcastable to the grid.

        Axes of length one are treated as constant along that coordinate.
        """
        value = np.asarray(tensor, dtype=float)
        for j in reversed(range(value.ndim)):
            if value.shape[j] > 1:
                value = np.tensordot(value, self.probs[j], axes=([j], [0]))
            else:
                value = value.squeeze(axis=j)
        return float(value)

    def conditional_mean(self, tensor: np.ndarray, j: int) -> np.ndarray:
        """E_j of a tensor, keeping axis j with length one."""
        return np.expand_dims(np.tensordot(tensor, self.probs[j], axes=([j], [0])), j)


def _check_oracle_inputs(spec: FunctionSpec, inputs: InputModel) -> tuple[int, ...]:
    if not inputs.is_finite:
        raise DomainError("the exact oracle needs FiniteDiscrete inputs")
    if spec.d != inputs.d:
        raise DimensionError(f"spec has dimension {spec.d}, inputs have {inputs.d}")
    if inputs.d > MAX_ORACLE_DIMENSION:
        raise DimensionError(f"the exact oracle supports d <= {MAX_ORACLE_DIMENSION}")
    shape = tuple(law.size for law in inputs.laws)
    size = int(np.prod(shape, dtype=object))
    if size > MAX_GRID_SIZE:
        raise GridTooLargeError(size=size, limit=MAX_GRID_SIZE)
    return shape


def evaluate_grid(spec: FunctionSpec, inputs: InputModel) -> ProductGrid:
    """
    Tabulate ``spec`` on the product grid of ``inputs``.

    Args:
        spec: Integrand
        inputs: FiniteDiscrete law per coordinate

    Returns:
        ProductGrid with f values and per-axis probabilities

    Raises:
        DomainError: If any law is not FiniteDiscrete
        DimensionError: If dimensions disagree or d exceeds 20
        GridTooLargeError: If the grid exceeds 10^7 points
    """
    shape = _check_oracle_inputs(spec, inputs)
    supports = [np.asarray(law.values) for law in inputs.laws]
    size = int(np.prod(shape))
    logger.debug("Evaluating %s on a grid of %d points", spec.kind.value, size)
    flat = np.empty(size)
    for start in range(0, size, _EVALUATION_CHUNK):
        stop = min(start + _EVALUATION_CHUNK, size)
        index = np.unravel_index(np.arange(start, stop), shape)
        X = np.column_stack([supports[j][index[j]] for j in range(len(shape))])
        flat[start:stop] = spec.evaluate_batch(spec_arguments(spec, inputs, X))
    probs = tuple(np.asarray(law.probs) for law in inputs.laws)
    return ProductGrid(flat.reshape(shape), probs)


def anova_effects(grid: ProductGrid) -> Iterator[tuple[int, np.ndarray]]:
    """
    Yield every ANOVA effect of a tabulated integrand.

    Effects are tensors with length-one axes for the coordinates they do not
    depend on; ``np.broadcast_to(effect, grid.values.shape)`` gives f_u on
    the full grid. The empty set yields the mean.

    Args:
        grid: Tabulated integrand

    Yields:
        (mask, f_u) pairs, one per subset of coordinates
    """

    def visit(tensor: np.ndarray, j: int, mask: int):
        if j == grid.d:
            yield mask, tensor
            return
        mean = grid.conditional_mean(tensor, j)
        yield from visit(mean, j + 1, mask)
        yield from visit(tensor - mean, j + 1, mask | (1 << j))

    yield from visit(grid.values, 0, 0)


@dataclass(frozen=True)
class AnovaResult:
    """
    Exact ANOVA decomposition of an integrand.

    Attributes:
        d: Number of coordinates
        components: sigma^2_u keyed by nonempty subset bitmask
        variance: Total variance sigma^2
        mean: E[f]
        grid_size: Number of grid points enumerated
    """

    d: int
    components: dict[int, float]
    variance: float
    mean: float
    grid_size: int

    @property
    def nu(self) -> float:
        """Mean dimension sum_u |u| sigma^2_u / sigma^2."""
        weighted = sum(mask.bit_count() * value for mask, value in self.components.items())
        return weighted / self.variance

    def _check_mask(self, mask: int) -> None:
        if not 0 < mask < 1 << self.d:
            raise DimensionError(f"subset mask {mask} out of range for d={self.d}")

    def lower_index(self, mask: int) -> float:
        """Closed index: sum of sigma^2_v over nonempty v inside ``mask``."""
        self._check_mask(mask)
        return sum(value for v, value in self.components.items() if v & ~mask == 0)

    def upper_index(self, mask: int) -> float:
        """Total index: sum of sigma^2_v over v meeting ``mask``."""
        self._check_mask(mask)
        return sum(value for v, value in self.components.items() if v & mask)

    def total_indices(self) -> np.ndarray:
        """tau-bar^2_j for every coordinate."""
        return np.array([self.upper_index(1 << j) for j in range(self.d)])

    def dimension_distribution(self) -> np.ndarray:
        """Share of the variance carried by effects of each order 1..d."""
        shares = np.zeros(self.d)
        for mask, value in self.components.items():
            shares[mask.bit_count() - 1] += value
        return shares / self.variance

    def superposition_dimension(self, level: float = 0.99) -> int:
        """Smallest order k whose effects of order <= k carry ``level`` of the variance."""
        if not 0 < level <= 1:
            raise DomainError("level must lie in (0, 1]")
        cumulative = np.cumsum(self.dimension_distribution())
        # rounding may leave the last entry a hair below 1
        return min(int(np.searchsorted(cumulative, level - 1e-12)) + 1, self.d)

    @property
    def non_additive_fraction(self) -> float:
        """Var(f - f_additive) / Var(f)."""
        additive = sum(self.components.get(1 << j, 0.0) for j in range(self.d))
        return max(1.0 - additive / self.variance, 0.0)


def _total_variance(grid: ProductGrid) -> tuple[float, float]:
    mean = grid.expectation(grid.values)
    variance = grid.expectation((grid.values - mean) ** 2)
    second_moment = grid.expectation(grid.values**2)
    if variance <= 1e-300 or variance <= _DEGENERATE_RELATIVE * second_moment:
        raise DegenerateVarianceError(
            "integrand is constant on the grid, mean dimension is undefined"
        )
    return mean, variance


def exact_anova(spec: FunctionSpec, inputs: InputModel) -> AnovaResult:
    """
    Exact variance components of ``spec`` under FiniteDiscrete inputs.

    Each sigma^2_u is the grid expectation of f_u^2, a sum of nonnegative
    terms, so no component can come out negative.

    Args:
        spec: Integrand
        inputs: FiniteDiscrete law per coordinate

    Returns:
        AnovaResult

    Raises:
        GridTooLargeError: If the product grid exceeds 10^7 points
        DegenerateVarianceError: If f is constant on the grid

    Example:
        >>> law = FiniteDiscrete.uniform([-1.0, 1.0])
        >>> exact_anova(SyntheticAdditive(d=2), InputModel.iid(law, 2)).nu
        1.0
    """
    grid = evaluate_grid(spec, inputs)
    mean, variance = _total_variance(grid)
    components = {}
    for mask, effect in anova_effects(grid):
        if mask:
            components[mask] = grid.expectation(effect**2)
    total = sum(components.values())
    if abs(total - variance) > 1e-10 * variance:
        logger.warning(
            "Variance components sum to %.17g, total variance is %.17g", total, variance
        )
    return AnovaResult(
        d=grid.d,
        components=dict(sorted(components.items())),
        variance=variance,
        mean=mean,
        grid_size=grid.size,
    )


def exact_total_index(result: AnovaResult, j: int) -> float:
    """
    tau-bar^2_j = sum of sigma^2_u over u containing coordinate j.

    Args:
        result: Exact decomposition
        j: Coordinate, 0-based

    Raises:
        DimensionError: If ``j`` is out of range
    """
    if not 0 <= j < result.d:
        raise DimensionError(f"coordinate {j} out of range for d={result.d}")
    return result.upper_index(1 << j)


def exact_jansen_check(spec: FunctionSpec, inputs: InputModel, j: int) -> float:
    """
    Jansen's form of the total index by double enumeration.

    Computes 1/2 E[(f(x_{-j}:x'_j) - f(x))^2] summing over every grid point x
    and every support value x'_j.

    Args:
        spec: Integrand
        inputs: FiniteDiscrete law per coordinate
        j: Coordinate, 0-based

    Returns:
        tau-bar^2_j
    """
    grid = evaluate_grid(spec, inputs)
    if not 0 <= j < grid.d:
        raise DimensionError(f"coordinate {j} out of range for d={grid.d}")
    total = 0.0
    for k, weight in enumerate(grid.probs[j]):
        hybrid = np.take(grid.values, [k], axis=j)
        total += weight * grid.expectation((hybrid - grid.values) ** 2)
    return 0.5 * total


def expected_conditional_variance(spec: FunctionSpec, inputs: InputModel, j: int) -> float:
    """
    E[Var(f | x_{-j})] computed directly on the grid.

    Args:
        spec: Integrand
        inputs: FiniteDiscrete law per coordinate
        j: Coordinate, 0-based
    """
    grid = evaluate_grid(spec, inputs)
    if not 0 <= j < grid.d:
        raise DimensionError(f"coordinate {j} out of range for d={grid.d}")
    centered = grid.values - grid.conditional_mean(grid.values, j)
    return grid.expectation(centered**2)

