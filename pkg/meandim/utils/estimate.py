"""
Randomized quasi-Monte Carlo estimation of mean dimension.

Two estimators are provided:

- ``estimate_mean_dimension_radial`` for integrands that depend on x only
  through ||x||^2 with standard normal inputs. The variance comes from a
  deterministic midpoint rule over the chi-square(d) law and the common total
  index from a three-dimensional scrambled Sobol' rule.
- ``estimate_mean_dimension_generic`` for any integrand and input model. It
  uses 2d-dimensional scrambled Sobol' points, evaluates f(x) once per point
  and reuses it across all d hybrid points.

Replicates share the raw Sobol' net and differ in their scramble seed,
derived from (master_seed, d, replicate). Reports pool replicates by the ratio
of pooled means.
"""

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from meandim.contrib.experiments import ESTIMATE_COLUMNS
from meandim.definitions.functions import FunctionSpec, spec_arguments
from meandim.definitions.inputs import ChiSquare, InputModel, Law
from meandim.definitions.points import (
    DirectionTable,
    derive_seed,
    load_default_table,
    midpoint_grid,
    owen_scramble,
    sobol_points,
)
from meandim.exceptions import DegenerateVarianceError, DimensionError, DomainError
from meandim.utils.special import chisq_quantile

logger = logging.getLogger(__name__)

# Variances below this are treated as zero
DEGENERATE_VARIANCE = 1e-300

# Unit-cube values held in memory at once by the generic estimator
_BLOCK_ELEMENTS = 2**22


@dataclass(frozen=True)
class ReplicateEstimate:
    """
    Estimates from one scrambled replicate.

    Attributes:
        replicate: 0-based replicate number
        seed: Scramble seed used
        sigma2: Variance estimate
        sum_tau2: Estimate of sum_j tau-bar^2_j
        nu: sum_tau2 / sigma2
        tau2: Per-coordinate total indices, when estimated separately
    """

    replicate: int
    seed: int
    sigma2: float
    sum_tau2: float
    nu: float
    tau2: tuple[float, ...] | None = field(default=None, repr=False)


def _standard_error(values: list[float]) -> float:
    if len(values) < 2:
        return math.nan
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


@dataclass(frozen=True)
class EstimateReport:
    """
    Replicated mean dimension estimate for one dimension d.

    Attributes:
        d: Dimension
        n: Points per replicate
        master_seed: Seed the replicate seeds were derived from
        replicates: One ReplicateEstimate per replicate, in order
        wall_time: Seconds spent; excluded from equality
    """

    d: int
    n: int
    master_seed: int
    replicates: tuple[ReplicateEstimate, ...]
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not self.replicates:
            raise DomainError("a report needs at least one replicate")
        if any(r.nu < 0 for r in self.replicates):
            raise DomainError("mean dimension estimates must be nonnegative")

    @property
    def R(self) -> int:
        return len(self.replicates)

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(r.seed for r in self.replicates)

    @property
    def sigma2(self) -> float:
        return float(np.mean([r.sigma2 for r in self.replicates]))

    @property
    def sum_tau2(self) -> float:
        return float(np.mean([r.sum_tau2 for r in self.replicates]))

    @property
    def nu(self) -> float:
        """Pooled mean dimension, the ratio of pooled means."""
        return self.sum_tau2 / self.sigma2

    @property
    def sigma2_se(self) -> float:
        return _standard_error([r.sigma2 for r in self.replicates])

    @property
    def sum_tau2_se(self) -> float:
        return _standard_error([r.sum_tau2 for r in self.replicates])

    @property
    def nu_se(self) -> float:
        """Standard error of the per-replicate nu values; NaN for one replicate."""
        return _standard_error([r.nu for r in self.replicates])

    def to_rows(self) -> list[dict[str, Any]]:
        """
        CSV rows: one per replicate, then a pooled row.

        Returns:
            Dictionaries keyed by ``ESTIMATE_COLUMNS``
        """
        rows = [
            dict(zip(
                ESTIMATE_COLUMNS,
                (self.d, r.replicate, self.n, r.sigma2, r.sum_tau2, r.nu, r.seed),
            ))
            for r in self.replicates
        ]
        rows.append(dict(zip(
            ESTIMATE_COLUMNS,
            (self.d, "pooled", self.n, self.sigma2, self.sum_tau2, self.nu, self.master_seed),
        )))
        return rows


def estimate_variance_1d(g: Callable[[np.ndarray], np.ndarray], law: Law, n: int) -> float:
    """
    Midpoint-rule variance of g(z) for a one-dimensional law.

    Args:
        g: Vectorized function of z
        law: Law with a quantile transform, for example ChiSquare(d)
        n: Number of midpoints, at least 2

    Returns:
        Sample variance (denominator n - 1) of g at the transformed midpoints

    Raises:
        DomainError: If ``n < 2``

    Example:
        >>> round(estimate_variance_1d(lambda z: z, ChiSquare(2), 2**14), 1)
        4.0
    """
    if n < 2:
        raise DomainError("estimate_variance_1d needs at least two points")
    z = law.transform(midpoint_grid(n).values[:, 0])
    return float(np.var(g(z), ddof=1))


def _checked_z3_df(z3_df: int) -> int:
    if z3_df not in (1, 2):
        raise DomainError(f"z3_df must be 1 or 2, got {z3_df}")
    return z3_df


def jansen_radial_tau(
    fradial: Callable[[np.ndarray], np.ndarray],
    d: int,
    n: int,
    seed: int,
    *,
    table: DirectionTable | None = None,
    z3_df: int = 1,
) -> float:
    """
    Total index of one coordinate of a radial integrand.

    With z_1 ~ chi-square(d - 1) and z_2, z_3 ~ chi-square(1), estimates
    1/2 E[(f(z_1 + z_2) - f(z_1 + z_3))^2] on a scrambled 3-dimensional
    Sobol' rule.

    Args:
        fradial: Vectorized function of s = ||x||^2
        d: Dimension, at least 2
        n: Number of points, a power of two
        seed: Scramble seed
        table: Direction numbers; the default table when None
        z3_df: Degrees of freedom of z_3 (1, or 2 to reproduce a variant)

    Returns:
        Estimate of tau-bar^2_1

    Raises:
        DomainError: If ``d < 2``
    """
    if d < 2:
        raise DomainError("jansen_radial_tau needs d >= 2")
    z3_df = _checked_z3_df(z3_df)
    table = table or load_default_table()
    u = owen_scramble(sobol_points(table, n, 3), seed).values
    z1 = chisq_quantile(d - 1, u[:, 0])
    z2 = chisq_quantile(1, u[:, 1])
    z3 = chisq_quantile(z3_df, u[:, 2])
    diff = fradial(z1 + z2) - fradial(z1 + z3)
    return float(0.5 * np.mean(diff * diff))


def estimate_mean_dimension_radial(
    spec: FunctionSpec,
    n: int,
    replicates: int,
    master_seed: int,
    *,
    table: DirectionTable | None = None,
    z3_df: int = 1,
    variance_points: int | None = None,
) -> EstimateReport:
    """
    Mean dimension of a radial integrand under standard normal inputs.

    By symmetry every coordinate has the same total index, so
    nu = d tau-bar^2_1 / sigma^2.

    Args:
        spec: Integrand with a radial profile, dimension ``spec.d``
        n: Points per replicate
        replicates: Number of replicates R, at least 1
        master_seed: Seed the replicate scramble seeds are derived from
        table: Direction numbers; the default table when None
        z3_df: Degrees of freedom of z_3 in the total index rule
        variance_points: Midpoints of the variance rule; n when None

    Returns:
        EstimateReport

    Raises:
        DomainError: If ``spec`` is not radial
        DegenerateVarianceError: If the variance is below 1e-300
    """
    if replicates < 1:
        raise DomainError("at least one replicate is required")
    d = spec.d
    profile = spec.radial_profile()
    started = time.perf_counter()
    sigma2 = estimate_variance_1d(profile, ChiSquare(d), variance_points or n)
    if sigma2 < DEGENERATE_VARIANCE:
        raise DegenerateVarianceError(f"variance {sigma2:.3g} is degenerate at d={d}")
    results = []
    for r in range(replicates):
        seed = derive_seed(master_seed, d, r)
        if d == 1:
            sum_tau2 = sigma2
        else:
            sum_tau2 = d * jansen_radial_tau(profile, d, n, seed, table=table, z3_df=z3_df)
        results.append(ReplicateEstimate(r, seed, sigma2, sum_tau2, sum_tau2 / sigma2))
    elapsed = time.perf_counter() - started
    logger.debug("Radial estimate at d=%d took %.2fs", d, elapsed)
    return EstimateReport(d, n, master_seed, tuple(results), wall_time=elapsed)


def _block_rows(dim: int) -> int:
    return max(1, _BLOCK_ELEMENTS // dim)


def estimate_mean_dimension_generic(
    spec: FunctionSpec,
    inputs: InputModel,
    n: int,
    replicates: int,
    master_seed: int,
    *,
    table: DirectionTable | None = None,
) -> EstimateReport:
    """
    Mean dimension of any integrand by the Jansen estimator.

    Coordinates 0..d-1 of each 2d-dimensional point give x and coordinates
    d..2d-1 give x'. The total index of coordinate j is estimated by
    1/2 mean (f(x_{-j}:x'_j) - f(x))^2 and the variance by
    1/2 mean (f(x) - f(x'))^2. Rows are processed in blocks so memory stays
    bounded at large d.

    Args:
        spec: Integrand
        inputs: Input model with the same dimension
        n: Points per replicate, a power of two
        replicates: Number of replicates R, at least 1
        master_seed: Seed the replicate scramble seeds are derived from
        table: Direction numbers; the default table when None

    Returns:
        EstimateReport with per-coordinate total indices on each replicate

    Raises:
        DimensionError: If spec and inputs disagree on d
        DirectionTableTooSmall: If the table has fewer than 2d dimensions
        DegenerateVarianceError: If a replicate's variance is below 1e-300
    """
    if replicates < 1:
        raise DomainError("at least one replicate is required")
    if spec.d != inputs.d:
        raise DimensionError(f"spec has dimension {spec.d}, inputs have {inputs.d}")
    d = spec.d
    table = table or load_default_table()
    table.require(2 * d)
    started = time.perf_counter()
    raw = sobol_points(table, n, 2 * d)
    step = _block_rows(2 * d)
    results = []
    for r in range(replicates):
        seed = derive_seed(master_seed, d, r)
        tau_sums = np.zeros(d)
        variance_sum = 0.0
        for start in range(0, n, step):
            u = owen_scramble(raw.rows(start, start + step), seed).values
            x = spec_arguments(spec, inputs, inputs.transform(u[:, :d]))
            x_prime = spec_arguments(spec, inputs, inputs.transform(u[:, d:]))
            fx = spec.evaluate_batch(x)
            fx_prime = spec.evaluate_batch(x_prime)
            hybrids = spec.evaluate_hybrids(x, x_prime)
            tau_sums += np.sum((hybrids - fx[:, None]) ** 2, axis=0)
            variance_sum += float(np.sum((fx - fx_prime) ** 2))
        tau2 = 0.5 * tau_sums / n
        sigma2 = 0.5 * variance_sum / n
        if sigma2 < DEGENERATE_VARIANCE:
            raise DegenerateVarianceError(
                f"variance {sigma2:.3g} is degenerate at d={d}, replicate {r}"
            )
        sum_tau2 = float(tau2.sum())
        results.append(
            ReplicateEstimate(r, seed, sigma2, sum_tau2, sum_tau2 / sigma2, tuple(tau2))
        )
        logger.debug("d=%d replicate %d: nu=%.6f", d, r, sum_tau2 / sigma2)
    elapsed = time.perf_counter() - started
    return EstimateReport(d, n, master_seed, tuple(results), wall_time=elapsed)
