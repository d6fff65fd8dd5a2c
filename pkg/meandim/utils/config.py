"""
Experiment configuration.

An ``ExperimentConfig`` is assembled from three layers, lowest first: the
per-experiment defaults in ``contrib.experiments``, an optional JSON document
and the command-line flags. Values are validated once, here, so the commands
can trust them.

The direction file follows its own precedence: the packaged file, then the
``MEANDIM_DIRS`` environment variable, then ``dirs`` from JSON, then
``--dirs``. Only the last two are stored in the config; the first two are
resolved by ``definitions.points.load_default_table``.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

from meandim.contrib.experiments import (
    DEFAULT_POINTS,
    DEFAULT_REPLICATES,
    DEFAULT_SEED,
    EXPERIMENT_DEFAULTS,
    Experiment,
)
from meandim.exceptions import ConfigError

logger = logging.getLogger(__name__)

COMMON_DEFAULTS = {
    "d": [],
    "p": [],
    "targets": [],
    "centers": None,
    "n": DEFAULT_POINTS,
    "replicates": DEFAULT_REPLICATES,
    "seed": DEFAULT_SEED,
    "out": ".",
    "jobs": None,
    "z3_df": 1,
    "dirs": None,
    "shift": 0.0,
    "offset": 0.0,
    "log_transform": False,
    "tol": 1e-8,
    "instances": None,
}

CONFIG_KEYS = frozenset(COMMON_DEFAULTS) | {"experiment"}


def parse_d_values(value: Any) -> tuple[int, ...]:
    """
    Parse a dimension list.

    Accepts an int, a list of ints, a string "a..b" (inclusive) or "a,b,c",
    or a mapping {"start": a, "stop": b} (inclusive).

    Raises:
        ConfigError: On malformed values

    Example:
        >>> parse_d_values("2..5")
        (2, 3, 4, 5)
    """
    try:
        if isinstance(value, bool):
            raise ValueError
        if isinstance(value, int):
            return (value,)
        if isinstance(value, dict):
            return tuple(range(int(value["start"]), int(value["stop"]) + 1))
        if isinstance(value, str):
            text = value.strip()
            if ".." in text:
                start, stop = text.split("..")
                return tuple(range(int(start), int(stop) + 1))
            return tuple(int(item) for item in text.split(",") if item.strip())
        return tuple(int(item) for item in value)
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"invalid d specification {value!r}") from None


def parse_float_values(value: Any, name: str) -> tuple[float, ...]:
    """Parse a float list given as a number, a list or a comma-separated string."""
    try:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return (float(value),)
        if isinstance(value, str):
            return tuple(float(item) for item in value.split(",") if item.strip())
        return tuple(float(item) for item in value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid {name} specification {value!r}") from None


def load_config_file(path: str | os.PathLike) -> dict[str, Any]:
    """
    Read a JSON configuration document.

    Raises:
        ConfigError: If the file cannot be read, is not JSON or is not an object
    """
    try:
        with open(path, encoding="utf-8") as src:
            data = json.load(src)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Resolved, validated configuration of one experiment run.

    Attributes:
        experiment: Experiment to run
        d: Dimensions
        p: Exponents (multiquadric-bound)
        targets: Target mean dimensions (gaussian-tune)
        centers: Centers of the Gaussian product, zeros when None
        n: Points per replicate, a power of two
        replicates: Replicates R
        seed: Master seed
        out: Output directory
        jobs: Worker processes
        z3_df: Degrees of freedom of z_3 in the radial total index rule
        dirs: Direction-file path from JSON or flags, if any
        shift: Centers c_j (multiquadric-bound); one value applies to every coordinate
        offset: Folded multiquadric offset a on the first coordinate
        log_transform: Also estimate log(z_{1:d}) (multiquadric-bound)
        tol: Tuner tolerance (gaussian-tune)
        instances: Oracle instance descriptions (oracle-compare)
    """

    experiment: Experiment
    d: tuple[int, ...]
    p: tuple[float, ...]
    targets: tuple[float, ...]
    centers: tuple[float, ...] | None
    n: int
    replicates: int
    seed: int
    out: str
    jobs: int
    z3_df: int
    dirs: str | None
    shift: tuple[float, ...]
    offset: float
    log_transform: bool
    tol: float
    instances: tuple[dict, ...] | None

    @classmethod
    def build(
        cls,
        experiment: Experiment | str,
        file_values: dict[str, Any] | None = None,
        overrides: dict[str, Any] | None = None,
    ) -> "ExperimentConfig":
        """
        Merge defaults, JSON values and flag overrides.

        Args:
            experiment: Experiment being configured
            file_values: Parsed JSON document, if any
            overrides: Flag values; None entries are ignored

        Returns:
            Validated ExperimentConfig

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        experiment = Experiment(experiment)
        file_values = dict(file_values or {})
        unknown = set(file_values) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        named = file_values.pop("experiment", experiment.value)
        if named != experiment.value:
            raise ConfigError(f"config is for {named}, not {experiment.value}")
        values = {**COMMON_DEFAULTS, **EXPERIMENT_DEFAULTS[experiment], **file_values}
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        if values["jobs"] is None:
            values["jobs"] = os.cpu_count() or 1
        config = cls(
            experiment=experiment,
            d=parse_d_values(values["d"]),
            p=parse_float_values(values["p"], "p"),
            targets=parse_float_values(values["targets"], "targets"),
            centers=(
                None if values["centers"] is None
                else parse_float_values(values["centers"], "centers")
            ),
            n=cls._integer(values["n"], "n"),
            replicates=cls._integer(values["replicates"], "replicates"),
            seed=cls._integer(values["seed"], "seed"),
            out=str(values["out"]),
            jobs=cls._integer(values["jobs"], "jobs"),
            z3_df=cls._integer(values["z3_df"], "z3_df"),
            dirs=None if values["dirs"] is None else str(values["dirs"]),
            shift=parse_float_values(values["shift"], "shift"),
            offset=float(values["offset"]),
            log_transform=bool(values["log_transform"]),
            tol=float(values["tol"]),
            instances=None if values["instances"] is None else tuple(values["instances"]),
        )
        config.validate()
        return config

    @staticmethod
    def _integer(value: Any, name: str) -> int:
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{name} must be an integer, got {value!r}") from None

    def validate(self) -> None:
        """
        Check the invariants of the configuration.

        Raises:
            ConfigError: On the first violated rule
        """
        if self.n < 2 or self.n & (self.n - 1):
            raise ConfigError(f"n={self.n} must be a power of two, at least 2")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.z3_df not in (1, 2):
            raise ConfigError("z3_df must be 1 or 2")
        if any(d < 1 for d in self.d):
            raise ConfigError("d values must be at least 1")
        if self.experiment is not Experiment.ORACLE_COMPARE and not self.d:
            raise ConfigError("no d values configured")
        if self.experiment is Experiment.MULTIQUADRIC_BOUND:
            if not self.p and not self.log_transform:
                raise ConfigError("no p values configured")
            if any(p == 0 or p > 1 for p in self.p):
                raise ConfigError("p values must be nonzero and at most 1")
            if self.offset < 0:
                raise ConfigError("offset must be nonnegative")
            if not self.shift:
                raise ConfigError("no shift values configured")
            for d in self.d:
                if len(self.shift) not in (1, d):
                    raise ConfigError(f"{len(self.shift)} shift values given for d={d}")
        if self.experiment is Experiment.GAUSSIAN_TUNE:
            if not self.targets:
                raise ConfigError("no targets configured")
            for d in self.d:
                for target in self.targets:
                    if not 1.0 < target < d:
                        raise ConfigError(f"target {target} is not inside (1, {d})")
                if self.centers is not None and len(self.centers) != d:
                    raise ConfigError(f"{len(self.centers)} centers given for d={d}")
            if not self.tol > 0:
                raise ConfigError("tol must be positive")
        if self.instances is not None and not all(isinstance(i, dict) for i in self.instances):
            raise ConfigError("instances must be JSON objects")

    @property
    def output_dir(self) -> Path:
        return Path(self.out)

    def to_dict(self) -> dict[str, Any]:
        """JSON form, as recorded in the manifest."""
        data = asdict(self)
        data["experiment"] = self.experiment.value
        return data
