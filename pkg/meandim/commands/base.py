"""
Shared machinery of the meandim subcommands.

Every subcommand is a ``Command`` class with a ``help`` text, an
``add_arguments(parser)`` hook and a ``handle(**options)`` entry point. The
base class adds the flags common to all experiments, resolves the
configuration layers, runs tasks (in worker processes when ``--jobs`` > 1)
and writes the outputs and the run manifest.
"""

import json
import logging
from collections.abc import Callable, Iterable
from multiprocessing import Pool
from pathlib import Path
from typing import Any, ClassVar

import meandim
from meandim.contrib.csv import CsvTable
from meandim.contrib.experiments import MANIFEST_FILE, OUTPUT_FILE_LOOKUP, Experiment
from meandim.definitions.points import DirectionTable, load_default_table
from meandim.utils.config import ExperimentConfig, load_config_file
from meandim.utils.git import get_git_commit

logger = logging.getLogger(__name__)

# Flag destinations that map to config keys of a different name
OPTION_TO_CONFIG = {"points": "n", "config_path": None, "verbosity": None, "command": None}


def map_tasks(func: Callable, tasks: Iterable, jobs: int = 1) -> list:
    """
    Apply ``func`` to every task, in order.

    With ``jobs > 1`` tasks run in a process pool; results are returned in
    task order either way, so serial and parallel runs agree.

    Args:
        func: Picklable module-level function
        tasks: Picklable task arguments
        jobs: Number of worker processes

    Returns:
        List of results, one per task
    """
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with Pool(min(jobs, len(tasks))) as pool:
        return pool.map(func, tasks, chunksize=1)


class BaseCommand:
    """
    Base class for subcommands.

    Attributes:
        experiment: Experiment the command runs
        help: One-line description shown by ``meandim --help``
    """

    experiment: ClassVar[Experiment]
    help: ClassVar[str] = ""

    def add_arguments(self, parser) -> None:
        """
        Add the flags shared by every subcommand.

        Args:
            parser: argparse parser of the subcommand
        """
        parser.add_argument(
            "--config",
            dest="config_path",
            default=None,
            help="JSON document with experiment settings; flags override its values.",
        )
        parser.add_argument("--out", default=None, help="Directory the outputs are written to.")
        parser.add_argument("--seed", type=int, default=None, help="Master seed (unsigned 64-bit).")
        parser.add_argument(
            "--jobs", type=int, default=None, help="Worker processes; defaults to the CPU count."
        )
        parser.add_argument(
            "--z3-df",
            dest="z3_df",
            type=int,
            choices=(1, 2),
            default=None,
            help="Degrees of freedom of z_3 in the radial total index rule.",
        )
        parser.add_argument(
            "--dirs",
            default=None,
            help="Direction-number file; falls back to $MEANDIM_DIRS, then the packaged file.",
        )
        parser.add_argument(
            "-n", "--points", type=int, default=None, help="Points per replicate, a power of two."
        )
        parser.add_argument("-R", "--replicates", type=int, default=None, help="Number of replicates.")

    def build_config(self, options: dict[str, Any]) -> ExperimentConfig:
        """
        Resolve the configuration from defaults, the JSON document and flags.

        Args:
            options: Parsed command-line options

        Returns:
            Validated ExperimentConfig
        """
        file_values = None
        if options.get("config_path"):
            file_values = load_config_file(options["config_path"])
        overrides = {}
        for key, value in options.items():
            if key in OPTION_TO_CONFIG:
                key = OPTION_TO_CONFIG[key]
                if key is None:
                    continue
            overrides[key] = value
        return ExperimentConfig.build(self.experiment, file_values, overrides)

    def load_table(self, config: ExperimentConfig) -> DirectionTable:
        return load_default_table(config.dirs)

    def output_paths(self, config: ExperimentConfig) -> list[Path]:
        directory = config.output_dir
        directory.mkdir(parents=True, exist_ok=True)
        return [directory / name for name in OUTPUT_FILE_LOOKUP[self.experiment]]

    def _write_csv(self, path: Path, columns: tuple[str, ...], rows: list[dict]) -> Path:
        logger.info("Writing %d rows to %s", len(rows), path)
        return CsvTable(columns, rows).write(path)

    def _write_manifest(self, config: ExperimentConfig, table: DirectionTable) -> Path:
        """
        Record what produced the outputs.

        The manifest holds the resolved configuration, the package version,
        the direction file and its checksum, and the git commit when known.
        """
        manifest = {
            "experiment": self.experiment.value,
            "version": meandim.__version__,
            "config": config.to_dict(),
            "direction_file": {"source": table.source, "sha256": table.sha256},
            "git_commit": get_git_commit(),
        }
        path = config.output_dir / MANIFEST_FILE
        with open(path, "w", encoding="utf-8") as dst:
            json.dump(manifest, dst, indent=2, sort_keys=True)
            dst.write("\n")
        return path

    def run(self, config: ExperimentConfig) -> list[Path]:
        """Run the experiment and return the files written."""
        raise NotImplementedError

    def handle(self, *args, **options) -> list[Path]:
        """
        Main command execution logic.

        Args:
            *args: Positional arguments (unused)
            **options: Command options from the argument parser

        Returns:
            Paths of the files written
        """
        config = self.build_config(options)
        logger.info("Running %s with %d d values", self.experiment.value, len(config.d))
        written = self.run(config)
        written.append(self._write_manifest(config, self.load_table(config)))
        return written
