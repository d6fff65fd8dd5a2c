"""
Estimator against the exact ANOVA oracle.

Runs the generic estimator on FiniteDiscrete instances small enough for
exact enumeration and reports the exact and estimated mean dimension, the
gap, the tolerance max(0.01, 3 SE) and the largest relative disagreement
between Jansen's double-enumeration total indices and the subset sums.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from meandim.commands.base import BaseCommand, map_tasks
from meandim.contrib.experiments import ORACLE_COLUMNS, Experiment
from meandim.contrib.markdown import Table
from meandim.definitions.functions import (
    FunctionSpec,
    GaussianProduct,
    Keister,
    Multiquadric,
    MultiquadricZ,
    SyntheticAdditive,
    SyntheticProduct,
    function_from_dict,
)
from meandim.definitions.inputs import FiniteDiscrete, InputModel
from meandim.definitions.points import load_default_table
from meandim.exceptions import ConfigError
from meandim.utils.anova import exact_anova, exact_jansen_check, exact_total_index
from meandim.utils.config import ExperimentConfig
from meandim.utils.estimate import estimate_mean_dimension_generic

logger = logging.getLogger(__name__)

MIN_TOLERANCE = 0.01
TOLERANCE_SE = 3.0


@dataclass(frozen=True)
class OracleInstance:
    """
    A named integrand with FiniteDiscrete inputs.

    Attributes:
        name: Label used in the output
        spec: Integrand
        inputs: FiniteDiscrete law per coordinate
    """

    name: str
    spec: FunctionSpec
    inputs: InputModel

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "OracleInstance":
        """
        Read ``{"name": ..., "function": {...}, "inputs": {...}}``.

        Raises:
            ConfigError: On missing keys or malformed parts
        """
        try:
            return cls(
                name=str(data["name"]),
                spec=function_from_dict(data["function"]),
                inputs=InputModel.from_dict(data["inputs"]),
            )
        except KeyError as err:
            raise ConfigError(f"oracle instance is missing {err}") from None


def default_instances() -> list[OracleInstance]:
    """Eleven mixed-support instances with d <= 6."""
    signs = FiniteDiscrete.uniform([-1.0, 1.0])
    ones_twos = FiniteDiscrete.uniform([1.0, 2.0])
    gh3 = FiniteDiscrete.gauss_hermite(3)
    gh5 = FiniteDiscrete.gauss_hermite(5)
    mixed = InputModel((
        ones_twos,
        FiniteDiscrete((0.5, 1.5, 3.0), (0.2, 0.5, 0.3)),
        FiniteDiscrete.uniform([1.0, 3.0]),
        FiniteDiscrete((2.0,), (1.0,)),
    ))
    halves = InputModel.iid(FiniteDiscrete.uniform([0.5, 1.0, 3.0]), 4)
    skewed = InputModel.iid(FiniteDiscrete((1.0, 2.0, 4.0), (0.5, 0.3, 0.2)), 5)
    return [
        OracleInstance(
            "multiquadric_z_d2",
            MultiquadricZ.for_inputs(0.5, InputModel.iid(ones_twos, 2)),
            InputModel.iid(ones_twos, 2),
        ),
        OracleInstance("additive_d4", SyntheticAdditive(d=4), InputModel.iid(signs, 4)),
        OracleInstance("product_d3", SyntheticProduct(d=3), InputModel.iid(signs, 3)),
        OracleInstance(
            "multiquadric_z_d3",
            MultiquadricZ.for_inputs(0.5, InputModel.iid(ones_twos, 3)),
            InputModel.iid(ones_twos, 3),
        ),
        OracleInstance(
            "inverse_multiquadric_z_d4", MultiquadricZ.for_inputs(-0.5, halves), halves
        ),
        OracleInstance(
            "inverse_quadratic_z_d5", MultiquadricZ.for_inputs(-1.0, skewed), skewed
        ),
        OracleInstance(
            "gaussian_d4",
            GaussianProduct(theta=1.0, centers=(0.0,) * 4),
            InputModel.iid(gh5, 4),
        ),
        OracleInstance(
            "gaussian_d6",
            GaussianProduct(theta=0.7, centers=(-1.0, -0.5, 0.0, 0.25, 0.5, 1.0)),
            InputModel.iid(gh3, 6),
        ),
        OracleInstance("keister_d3", Keister(d=3), InputModel.iid(gh5, 3)),
        OracleInstance(
            "multiquadric_d3",
            Multiquadric(p=0.5, a=1.0, centers=(0.0, 0.5, -0.5)),
            InputModel.iid(gh3, 3),
        ),
        OracleInstance("mixed_z_d4", MultiquadricZ.for_inputs(0.5, mixed), mixed),
    ]


def compare_instance(task: tuple[OracleInstance, ExperimentConfig]) -> dict[str, Any]:
    """Exact and estimated mean dimension of one instance."""
    instance, config = task
    exact = exact_anova(instance.spec, instance.inputs)
    report = estimate_mean_dimension_generic(
        instance.spec,
        instance.inputs,
        config.n,
        config.replicates,
        config.seed,
        table=load_default_table(config.dirs),
    )
    discrepancies = []
    for j in range(exact.d):
        subset_sum = exact_total_index(exact, j)
        jansen = exact_jansen_check(instance.spec, instance.inputs, j)
        scale = subset_sum if subset_sum > 0 else exact.variance
        discrepancies.append(abs(jansen - subset_sum) / scale)
    se = report.nu_se
    tolerance = MIN_TOLERANCE if math.isnan(se) else max(MIN_TOLERANCE, TOLERANCE_SE * se)
    gap = abs(report.nu - exact.nu)
    logger.info("%s: exact %.6f, estimate %.6f", instance.name, exact.nu, report.nu)
    return {
        "instance": instance.name,
        "family": instance.spec.kind.value,
        "d": exact.d,
        "grid_size": exact.grid_size,
        "nu_exact": exact.nu,
        "nu_hat": report.nu,
        "nu_se": se,
        "gap": gap,
        "tolerance": tolerance,
        "passed": gap <= tolerance,
        "jansen_max_rel_error": max(discrepancies),
    }


class Command(BaseCommand):
    """
    Oracle comparison subcommand.

    Usage:
        meandim oracle-compare --config instances.json --out results/
    """

    experiment = Experiment.ORACLE_COMPARE
    help = "Compare estimated mean dimensions with the exact ANOVA oracle."

    def instances(self, config: ExperimentConfig) -> list[OracleInstance]:
        if config.instances is None:
            return default_instances()
        return [OracleInstance.from_dict(item) for item in config.instances]

    def run(self, config: ExperimentConfig) -> list[Path]:
        (csv_path,) = self.output_paths(config)
        tasks = [(instance, config) for instance in self.instances(config)]
        rows = map_tasks(compare_instance, tasks, config.jobs)
        self._write_csv(csv_path, ORACLE_COLUMNS, rows)
        shown = ("instance", "nu_exact", "nu_hat", "gap", "passed")
        print(Table([{k: row[k] for k in shown} for row in rows]))
        failed = [row["instance"] for row in rows if not row["passed"]]
        if failed:
            logger.warning("Instances outside tolerance: %s", ", ".join(failed))
        return [csv_path]
