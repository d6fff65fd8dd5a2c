"""
Generalized multiquadrics against their mean dimension bound.

For every (p, d) the command builds z_j = (x_j - c_j)^2 with x_j ~ N(0, 1)
(plus the folded offset a on the first coordinate), estimates the mean
dimension of (z_{1:d} / mu_{1:d})^p and sets it beside the theory values:
the bound 1 + (p - 1)^2 / 2 * sigma^2 / mu^2, the moment and variance
expansions and the bound on sum_j tau-bar^2_j.

With every c_j = 0 and a = 0 the integrand is a function of ||x||^2 and the radial
estimator is used; any shift or offset falls back to the generic estimator.
"""

import logging
from pathlib import Path
from typing import Any

from meandim.commands.base import BaseCommand, map_tasks
from meandim.contrib.experiments import (
    ESTIMATE_COLUMNS,
    MULTIQUADRIC_COLUMNS,
    Experiment,
)
from meandim.contrib.families import Family
from meandim.contrib.markdown import Table
from meandim.definitions.functions import FunctionSpec, LogSumZ, MultiquadricZ
from meandim.definitions.inputs import InputModel, NormalShift
from meandim.definitions.points import load_default_table
from meandim.exceptions import DimensionError
from meandim.utils.config import ExperimentConfig
from meandim.utils.estimate import (
    EstimateReport,
    estimate_mean_dimension_generic,
    estimate_mean_dimension_radial,
)
from meandim.utils.theory import expansion_report

logger = logging.getLogger(__name__)

# Standard errors allowed above the bound before a cell is flagged
BOUND_SLACK_SE = 3.0

# Midpoints of the radial variance rule; its tail bias must stay well below nu - 1 at large d
VARIANCE_POINTS = 2**22

REPLICATE_COLUMNS = ("function", "p") + ESTIMATE_COLUMNS


def folded_inputs(d: int, shifts: tuple[float, ...], offset: float) -> InputModel:
    """
    z inputs of a multiquadric with centers c_j and offset a.

    A single shift is used for every coordinate. The offset is folded into z_1.

    Raises:
        DimensionError: If there are neither one nor d shifts
    """
    centers = tuple(shifts) * d if len(shifts) == 1 else tuple(shifts)
    if len(centers) != d:
        raise DimensionError(f"{len(shifts)} shifts given for d={d}")
    laws = [NormalShift(c=c) for c in centers]
    laws[0] = NormalShift(c=centers[0], offset=offset)
    return InputModel(tuple(laws))


def estimator_for(config: ExperimentConfig) -> str:
    """Name of the estimator used: radial for central chi-square(1) inputs."""
    if config.offset == 0 and not any(config.shift):
        return "radial"
    return "generic"


def _spec_for(p: float | None, inputs: InputModel) -> FunctionSpec:
    if p is None:
        return LogSumZ.for_inputs(inputs)
    return MultiquadricZ.for_inputs(p, inputs)


def _estimate_cell(task: tuple[float | None, int, ExperimentConfig]) -> EstimateReport:
    p, d, config = task
    inputs = folded_inputs(d, config.shift, config.offset)
    spec = _spec_for(p, inputs)
    table = load_default_table(config.dirs)
    if estimator_for(config) == "radial":
        report = estimate_mean_dimension_radial(
            spec,
            config.n,
            config.replicates,
            config.seed,
            table=table,
            z3_df=config.z3_df,
            variance_points=max(config.n, VARIANCE_POINTS),
        )
    else:
        report = estimate_mean_dimension_generic(
            spec, inputs, config.n, config.replicates, config.seed, table=table
        )
    logger.info("p=%s d=%d: nu=%.6f (%.2fs)", p, d, report.nu, report.wall_time)
    return report


def summary_row(p: float | None, report: EstimateReport, config: ExperimentConfig) -> dict[str, Any]:
    """One output row for a (p, d) cell; theory columns stay empty for log(z)."""
    family = Family.LOG_SUM_Z if p is None else Family.MULTIQUADRIC_Z
    row = {
        "function": family.value,
        "p": p,
        "d": report.d,
        "estimator": estimator_for(config),
        "n": report.n,
        "replicates": report.R,
        "sigma2": report.sigma2,
        "sigma2_se": report.sigma2_se,
        "sum_tau2": report.sum_tau2,
        "sum_tau2_se": report.sum_tau2_se,
        "nu": report.nu,
        "nu_se": report.nu_se,
        "scaled_gap": (report.nu - 1.0) * report.d,
    }
    if p is None:
        return row
    theory = expansion_report(folded_inputs(report.d, config.shift, config.offset).summary, p)
    slack = 0.0 if report.R < 2 else BOUND_SLACK_SE * report.nu_se
    lead = theory.leading_variance
    row.update(
        {
            "nu_bound": theory.nu_bound,
            "within_bound": report.nu <= theory.nu_bound + slack,
            "leading_variance": lead,
            "sigma2_ratio": report.sigma2 / lead,
            "sum_tau2_ratio": report.sum_tau2 / lead,
            "moment_expansion": theory.moment_expansion,
            "variance_expansion": theory.variance_expansion,
            "tau_sum_bound": theory.tau_sum_bound,
        }
    )
    return row


class Command(BaseCommand):
    """
    Multiquadric bound subcommand.

    Usage:
        meandim multiquadric-bound --p -1 -0.5 0.5 --d 64,256,1024 --out results/
    """

    experiment = Experiment.MULTIQUADRIC_BOUND
    help = "Compare estimated multiquadric mean dimensions with their asymptotic bound."

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument("--p", nargs="+", type=float, default=None, help="Exponents p.")
        parser.add_argument("--d", default=None, help='Dimensions, as "a..b" or "a,b,c".')
        parser.add_argument(
            "--shift",
            nargs="+",
            type=float,
            default=None,
            help="Centers c_j, one per coordinate or a single value for all.",
        )
        parser.add_argument(
            "--offset", type=float, default=None, help="Multiquadric offset a, folded into z_1."
        )
        parser.add_argument(
            "--log-transform",
            dest="log_transform",
            action="store_true",
            default=None,
            help="Also estimate the mean dimension of log(z_{1:d}); no bound is evaluated.",
        )

    def run(self, config: ExperimentConfig) -> list[Path]:
        summary_path, replicate_path = self.output_paths(config)
        exponents: list[float | None] = list(config.p)
        if config.log_transform:
            exponents.append(None)
        cells = [(p, d) for p in exponents for d in config.d]
        reports = map_tasks(_estimate_cell, [(p, d, config) for p, d in cells], config.jobs)
        rows = [summary_row(p, report, config) for (p, _), report in zip(cells, reports)]
        replicate_rows = []
        for (p, _), report in zip(cells, reports):
            family = Family.LOG_SUM_Z if p is None else Family.MULTIQUADRIC_Z
            for row in report.to_rows():
                replicate_rows.append({"function": family.value, "p": p, **row})
        self._write_csv(summary_path, MULTIQUADRIC_COLUMNS, rows)
        self._write_csv(replicate_path, REPLICATE_COLUMNS, replicate_rows)
        print(Table([
            {k: row.get(k) for k in ("function", "p", "d", "nu", "nu_se", "nu_bound", "within_bound")}
            for row in rows
        ]))
        return [summary_path, replicate_path]
