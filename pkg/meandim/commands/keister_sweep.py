"""
Mean dimension of Keister's function across dimensions.

Estimates nu for cos(||x|| / 2) with standard normal inputs at every
configured d using the radial estimator, writes one CSV row per (d,
replicate) plus pooled rows, and draws nu against sqrt(d) with one trace per
replicate and dotted references at 1 and 2.
"""

import logging
import math
from pathlib import Path

import numpy as np

from meandim.commands.base import BaseCommand, map_tasks
from meandim.contrib.experiments import ESTIMATE_COLUMNS, Experiment
from meandim.contrib.markdown import Table
from meandim.contrib.svg import LineChart
from meandim.definitions.base import BaseArray
from meandim.definitions.functions import Keister
from meandim.definitions.points import load_default_table
from meandim.utils.config import ExperimentConfig
from meandim.utils.estimate import EstimateReport, estimate_mean_dimension_radial
from meandim.utils.theory import keister_phase, keister_regime

logger = logging.getLogger(__name__)

REFERENCE_LEVELS = (1.0, 2.0)


def _estimate_keister(task: tuple[int, ExperimentConfig]) -> EstimateReport:
    d, config = task
    report = estimate_mean_dimension_radial(
        Keister(d=d),
        config.n,
        config.replicates,
        config.seed,
        table=load_default_table(config.dirs),
        z3_df=config.z3_df,
    )
    logger.info("d=%d: nu=%.6f (%.2fs)", d, report.nu, report.wall_time)
    return report


def _local_minima(values: np.ndarray) -> list[int]:
    """Indices no larger than their neighbours."""
    padded = np.concatenate([[np.inf], values, [np.inf]])
    return [i for i in range(len(values)) if padded[i + 1] <= min(padded[i], padded[i + 2])]


def summarize(reports: list[EstimateReport]) -> list[dict]:
    """
    Rows describing the extremes, peaks and troughs of a sweep.

    Peaks are the d whose sqrt(d)/2 comes closest to a multiple of pi,
    troughs the d closest to an odd multiple of pi/2.
    """
    if not reports:
        return []
    nus = np.array([r.nu for r in reports])
    phases = np.array([keister_phase(r.d) for r in reports])
    selected = {int(nus.argmin()), int(nus.argmax())}
    if len(reports) > 2:
        selected.update(_local_minima(np.minimum(phases, 1.0 - phases)))
        selected.update(_local_minima(np.abs(phases - 0.5)))
    return [
        {
            "d": reports[i].d,
            "sqrt_d": math.sqrt(reports[i].d),
            "regime": keister_regime(reports[i].d),
            "nu": reports[i].nu,
            "nu_se": reports[i].nu_se,
        }
        for i in sorted(selected)
    ]


def sweep_chart(reports: list[EstimateReport]) -> LineChart:
    """nu against sqrt(d), one trace per replicate."""
    chart = LineChart(
        "Mean dimension of Keister's function", "sqrt(d)", "mean dimension"
    )
    x = [math.sqrt(r.d) for r in reports]
    for replicate in range(reports[0].R):
        chart.add_trace(x, [r.replicates[replicate].nu for r in reports])
    for level in REFERENCE_LEVELS:
        chart.add_reference(level)
    return chart


class Command(BaseCommand):
    """
    Keister sweep subcommand.

    Usage:
        meandim keister-sweep --d 2..1000 -n 16384 -R 5 --out results/
    """

    experiment = Experiment.KEISTER_SWEEP
    help = "Estimate the mean dimension of Keister's function over a range of d."

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument(
            "--d", default=None, help='Dimensions, as "a..b" (inclusive) or "a,b,c".'
        )

    def run(self, config: ExperimentConfig) -> list[Path]:
        csv_path, svg_path = self.output_paths(config)
        reports = map_tasks(_estimate_keister, [(d, config) for d in config.d], config.jobs)
        self._write_csv(csv_path, ESTIMATE_COLUMNS, BaseArray(reports).to_rows())
        sweep_chart(reports).write(svg_path)
        print(Table(summarize(reports)))
        return [csv_path, svg_path]
