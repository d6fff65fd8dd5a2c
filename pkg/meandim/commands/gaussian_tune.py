"""
Tune Gaussian RBF products to a target mean dimension.

For every d and target the command solves for theta with the closed form,
then confirms the result with the generic randomized QMC estimator.
"""

import logging
import math
from pathlib import Path
from typing import Any

from meandim.commands.base import BaseCommand, map_tasks
from meandim.contrib.experiments import GAUSSIAN_COLUMNS, Experiment
from meandim.contrib.markdown import Table
from meandim.definitions.functions import GaussianProduct
from meandim.definitions.inputs import InputModel, StandardNormal
from meandim.definitions.points import load_default_table
from meandim.exceptions import DegenerateVarianceError
from meandim.utils.config import ExperimentConfig
from meandim.utils.estimate import estimate_mean_dimension_generic
from meandim.utils.theory import gaussian_product_nu, tune_theta

logger = logging.getLogger(__name__)


def _tune(task: tuple[int, float, ExperimentConfig]) -> dict[str, Any]:
    d, target, config = task
    centers = config.centers or (0.0,) * d
    theta = tune_theta(d, target, centers=centers, tol=config.tol)
    closed_form = gaussian_product_nu(theta, centers)
    row = {"d": d, "target": target, "theta": theta, "nu_closed_form": closed_form}
    try:
        report = estimate_mean_dimension_generic(
            GaussianProduct(theta=theta, centers=centers),
            InputModel.iid(StandardNormal(), d),
            config.n,
            config.replicates,
            config.seed,
            table=load_default_table(config.dirs),
        )
    except DegenerateVarianceError:
        # the spike around the centers is narrower than the point set resolves
        logger.warning(
            "d=%d target=%g: theta=%.3g is too narrow to estimate with n=%d", d, target, theta, config.n
        )
        return {**row, "nu_hat": math.nan, "nu_se": math.nan, "gap": math.nan}
    logger.info("d=%d target=%g: theta=%.6g nu_hat=%.6f", d, target, theta, report.nu)
    return {**row, "nu_hat": report.nu, "nu_se": report.nu_se, "gap": abs(report.nu - closed_form)}


class Command(BaseCommand):
    """
    Gaussian tuning subcommand.

    Usage:
        meandim gaussian-tune --d 10 --targets 1.5 3 7 9.9 --out results/
    """

    experiment = Experiment.GAUSSIAN_TUNE
    help = "Find Gaussian RBF scales attaining target mean dimensions."

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument("--d", default=None, help='Dimensions, as "a..b" or "a,b,c".')
        parser.add_argument(
            "--targets", nargs="+", type=float, default=None, help="Target mean dimensions in (1, d)."
        )
        parser.add_argument("--tol", type=float, default=None, help="Tolerance on |nu(theta) - target|.")

    def run(self, config: ExperimentConfig) -> list[Path]:
        (csv_path,) = self.output_paths(config)
        tasks = [(d, target, config) for d in config.d for target in config.targets]
        rows = map_tasks(_tune, tasks, config.jobs)
        self._write_csv(csv_path, GAUSSIAN_COLUMNS, rows)
        print(Table(rows))
        return [csv_path]
