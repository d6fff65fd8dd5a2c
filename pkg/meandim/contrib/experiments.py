"""
Experiment names, defaults and output layouts.

Each CLI subcommand corresponds to one ``Experiment``. The lookup tables below
hold the per-experiment defaults (the lowest layer of configuration
precedence), the output file names and the CSV column order, so that the
commands themselves stay free of literals.
"""

from enum import Enum


class Experiment(Enum):
    """Enumeration of the experiments exposed as subcommands."""

    KEISTER_SWEEP = "keister-sweep"
    MULTIQUADRIC_BOUND = "multiquadric-bound"
    GAUSSIAN_TUNE = "gaussian-tune"
    ORACLE_COMPARE = "oracle-compare"


DEFAULT_POINTS = 2**14
DEFAULT_REPLICATES = 5
DEFAULT_SEED = 20240229

# Per-experiment defaults applied before the JSON document and the flags
EXPERIMENT_DEFAULTS = {
    Experiment.KEISTER_SWEEP: {
        "d": "2..1000",
    },
    Experiment.MULTIQUADRIC_BOUND: {
        "d": [64, 256, 1024],
        "p": [-1.0, -0.5, 0.5],
    },
    Experiment.GAUSSIAN_TUNE: {
        "d": [10],
        "targets": [1.5, 3.0, 7.0, 9.9],
        "tol": 1e-8,
    },
    Experiment.ORACLE_COMPARE: {
        "n": 2**12,
    },
}

# Output file names, relative to the output directory
OUTPUT_FILE_LOOKUP = {
    Experiment.KEISTER_SWEEP: ("keister_sweep.csv", "keister_sweep.svg"),
    Experiment.MULTIQUADRIC_BOUND: (
        "multiquadric_bound.csv",
        "multiquadric_bound_replicates.csv",
    ),
    Experiment.GAUSSIAN_TUNE: ("gaussian_tune.csv",),
    Experiment.ORACLE_COMPARE: ("oracle_compare.csv",),
}

MANIFEST_FILE = "manifest.json"

# Per-replicate estimate rows
ESTIMATE_COLUMNS = ("d", "replicate", "n", "sigma2", "sum_tau2", "nu", "seed")

# Summary rows of the multiquadric bound experiment
MULTIQUADRIC_COLUMNS = (
    "function",
    "p",
    "d",
    "estimator",
    "n",
    "replicates",
    "sigma2",
    "sigma2_se",
    "sum_tau2",
    "sum_tau2_se",
    "nu",
    "nu_se",
    "nu_bound",
    "within_bound",
    "scaled_gap",
    "leading_variance",
    "sigma2_ratio",
    "sum_tau2_ratio",
    "moment_expansion",
    "variance_expansion",
    "tau_sum_bound",
)

GAUSSIAN_COLUMNS = (
    "d",
    "target",
    "theta",
    "nu_closed_form",
    "nu_hat",
    "nu_se",
    "gap",
)

ORACLE_COLUMNS = (
    "instance",
    "family",
    "d",
    "grid_size",
    "nu_exact",
    "nu_hat",
    "nu_se",
    "gap",
    "tolerance",
    "passed",
    "jansen_max_rel_error",
)
