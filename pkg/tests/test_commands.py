"""
Tests for the meandim subcommands and their configuration.

The subcommands are driven through ``cli.main`` on small grids and their
CSV, SVG and manifest outputs are read back.
"""

import contextlib
import csv
import hashlib
import io
import json
import math
import tempfile
from pathlib import Path
from unittest import TestCase

import meandim
from meandim.cli import main
from meandim.commands.keister_sweep import summarize
from meandim.commands.multiquadric_bound import REPLICATE_COLUMNS, folded_inputs
from meandim.contrib.csv import CsvTable, format_cell
from meandim.contrib.experiments import (
    ESTIMATE_COLUMNS,
    GAUSSIAN_COLUMNS,
    MULTIQUADRIC_COLUMNS,
    ORACLE_COLUMNS,
    Experiment,
)
from meandim.contrib.markdown import Table
from meandim.contrib.svg import LineChart, strip_timestamp
from meandim.definitions.functions import Keister
from meandim.exceptions import ConfigError
from meandim.utils.config import ExperimentConfig, load_config_file, parse_d_values
from meandim.utils.estimate import estimate_mean_dimension_radial

from .utils import data_path


def run_cli(*argv: str) -> tuple[int, str, str]:
    """Run ``meandim`` quietly, returning the status, stdout and stderr."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        status = main([*argv, "-v", "0"])
    return status, out.getvalue(), err.getvalue()


def read_csv(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="", encoding="utf-8") as src:
        reader = csv.DictReader(src)
        return reader.fieldnames, list(reader)


class KeisterSweepCommandTests(TestCase):
    """End-to-end runs of keister-sweep."""

    ARGS = ("keister-sweep", "--d", "2..6", "-n", "256", "-R", "3")

    def test_outputs(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, stdout, _ = run_cli(*self.ARGS, "--jobs", "1", "--out", tmp)
            self.assertEqual(status, 0)
            self.assertIn("| d | sqrt_d | regime | nu | nu_se |", stdout)

            header, rows = read_csv(Path(tmp) / "keister_sweep.csv")
            self.assertEqual(tuple(header), ESTIMATE_COLUMNS)
            self.assertEqual(len(rows), 5 * 4)
            pooled = [row for row in rows if row["replicate"] == "pooled"]
            self.assertEqual([int(row["d"]) for row in pooled], [2, 3, 4, 5, 6])
            for row in rows:
                self.assertEqual(row["n"], "256")
                self.assertGreater(float(row["nu"]), 0.0)

            svg = (Path(tmp) / "keister_sweep.svg").read_text(encoding="utf-8")
            self.assertEqual(svg.count('<polyline class="trace"'), 3)
            self.assertEqual(svg.count('<line class="reference"'), 2)

            manifest = json.loads((Path(tmp) / "manifest.json").read_text(encoding="utf-8"))
            self.assertEqual(manifest["experiment"], "keister-sweep")
            self.assertEqual(manifest["version"], meandim.__version__)
            self.assertEqual(manifest["config"]["d"], [2, 3, 4, 5, 6])
            self.assertEqual(manifest["config"]["n"], 256)
            self.assertEqual(set(manifest["direction_file"]), {"source", "sha256"})
            self.assertIn("git_commit", manifest)

    def test_parallel_run_matches_serial_run(self):
        with tempfile.TemporaryDirectory() as serial, tempfile.TemporaryDirectory() as parallel:
            self.assertEqual(run_cli(*self.ARGS, "--jobs", "1", "--out", serial)[0], 0)
            self.assertEqual(run_cli(*self.ARGS, "--jobs", "2", "--out", parallel)[0], 0)
            self.assertEqual(
                (Path(serial) / "keister_sweep.csv").read_bytes(),
                (Path(parallel) / "keister_sweep.csv").read_bytes(),
            )
            self.assertEqual(
                strip_timestamp((Path(serial) / "keister_sweep.svg").read_text(encoding="utf-8")),
                strip_timestamp((Path(parallel) / "keister_sweep.svg").read_text(encoding="utf-8")),
            )

    def test_direction_file_flag(self):
        path = data_path("directions_head.txt")
        with tempfile.TemporaryDirectory() as tmp:
            status, _, _ = run_cli(*self.ARGS, "--jobs", "1", "--dirs", str(path), "--out", tmp)
            self.assertEqual(status, 0)
            manifest = json.loads((Path(tmp) / "manifest.json").read_text(encoding="utf-8"))
        self.assertTrue(manifest["direction_file"]["source"].endswith("directions_head.txt"))
        self.assertEqual(manifest["direction_file"]["sha256"], hashlib.sha256(path.read_bytes()).hexdigest())
        self.assertEqual(manifest["config"]["dirs"], str(path))

    def test_config_file_and_flag_precedence(self):
        with tempfile.TemporaryDirectory() as tmp:
            config_path = Path(tmp) / "sweep.json"
            config_path.write_text(json.dumps({"d": [3, 4], "n": 128, "replicates": 2, "seed": 7}))
            status, _, _ = run_cli(
                "keister-sweep", "--config", str(config_path), "--seed", "11", "--jobs", "1", "--out", tmp
            )
            self.assertEqual(status, 0)
            manifest = json.loads((Path(tmp) / "manifest.json").read_text(encoding="utf-8"))
            _, rows = read_csv(Path(tmp) / "keister_sweep.csv")
        self.assertEqual(manifest["config"]["seed"], 11)
        self.assertEqual(manifest["config"]["n"], 128)
        self.assertEqual(len(rows), 2 * 3)
        self.assertEqual(rows[-1]["seed"], "11")

    def test_invalid_configuration_exits_with_status_one(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, _, stderr = run_cli("keister-sweep", "--d", "2..4", "-n", "100", "--out", tmp)
            self.assertEqual(status, 1)
            self.assertIn("power of two", stderr)
            self.assertFalse((Path(tmp) / "manifest.json").exists())

    def test_missing_config_file(self):
        status, _, stderr = run_cli("keister-sweep", "--config", "/nonexistent/meandim.json")
        self.assertEqual(status, 1)
        self.assertIn("cannot read config", stderr)


class MultiquadricBoundCommandTests(TestCase):
    """End-to-end runs of multiquadric-bound."""

    def test_radial_cells_with_log_transform(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, _, _ = run_cli(
                "multiquadric-bound", "--p", "0.5", "--d", "16", "--log-transform",
                "-n", "1024", "-R", "3", "--jobs", "1", "--out", tmp,
            )
            self.assertEqual(status, 0)
            header, rows = read_csv(Path(tmp) / "multiquadric_bound.csv")
            replicate_header, replicates = read_csv(Path(tmp) / "multiquadric_bound_replicates.csv")
        self.assertEqual(tuple(header), MULTIQUADRIC_COLUMNS)
        self.assertEqual(tuple(replicate_header), REPLICATE_COLUMNS)
        self.assertEqual([row["function"] for row in rows], ["multiquadric_z", "log_sum_z"])
        self.assertEqual(len(replicates), 2 * 4)

        power, log = rows
        self.assertEqual(power["estimator"], "radial")
        self.assertEqual(float(power["nu_bound"]), 1.0 + 0.125 * 2.0 / 16)
        self.assertIn(power["within_bound"], ("true", "false"))
        self.assertAlmostEqual(float(power["leading_variance"]), 0.25 * 2.0 / 16)
        self.assertGreater(float(power["nu"]), 1.0)
        self.assertLess(float(power["nu"]), 1.05)
        self.assertEqual(log["p"], "")
        self.assertEqual(log["nu_bound"], "")
        self.assertEqual(log["within_bound"], "")
        self.assertGreater(float(log["nu"]), 1.0)

    def test_shifted_inputs_use_generic_estimator(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, _, _ = run_cli(
                "multiquadric-bound", "--p", "-1", "--d", "4", "--shift", "0.5", "--offset", "1",
                "-n", "1024", "-R", "2", "--jobs", "1", "--out", tmp,
            )
            self.assertEqual(status, 0)
            _, rows = read_csv(Path(tmp) / "multiquadric_bound.csv")
        (row,) = rows
        self.assertEqual(row["estimator"], "generic")
        self.assertTrue(math.isfinite(float(row["nu"])))
        self.assertGreaterEqual(float(row["nu"]), 1.0)

    def test_per_coordinate_shifts(self):
        inputs = folded_inputs(3, (0.0, 0.5, 1.0), 1.0)
        self.assertAlmostEqual(inputs.summary.mean, 1.0 + 1.25 + 2.0 + 1.0)
        self.assertAlmostEqual(folded_inputs(4, (0.5,), 0.0).summary.mean, 4 * 1.25)
        with tempfile.TemporaryDirectory() as tmp:
            status, _, _ = run_cli(
                "multiquadric-bound", "--p", "0.5", "--d", "3", "--shift", "0", "0.5", "1",
                "-n", "512", "-R", "2", "--jobs", "1", "--out", tmp,
            )
            self.assertEqual(status, 0)
            _, rows = read_csv(Path(tmp) / "multiquadric_bound.csv")
            manifest = json.loads((Path(tmp) / "manifest.json").read_text(encoding="utf-8"))
        (row,) = rows
        self.assertEqual(row["estimator"], "generic")
        self.assertTrue(math.isfinite(float(row["nu"])))
        self.assertEqual(manifest["config"]["shift"], [0.0, 0.5, 1.0])
        status, _, stderr = run_cli("multiquadric-bound", "--p", "0.5", "--d", "4", "--shift", "0", "1")
        self.assertEqual(status, 1)
        self.assertIn("shift values given for d=4", stderr)

    def test_rejects_exponents_above_one(self):
        status, _, stderr = run_cli("multiquadric-bound", "--p", "2", "--d", "8")
        self.assertEqual(status, 1)
        self.assertIn("at most 1", stderr)


class GaussianTuneCommandTests(TestCase):
    """End-to-end runs of gaussian-tune."""

    def test_tuned_rows(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, _, _ = run_cli(
                "gaussian-tune", "--d", "4", "--targets", "1.5", "2",
                "-n", "4096", "-R", "3", "--jobs", "1", "--out", tmp,
            )
            self.assertEqual(status, 0)
            header, rows = read_csv(Path(tmp) / "gaussian_tune.csv")
        self.assertEqual(tuple(header), GAUSSIAN_COLUMNS)
        self.assertEqual([float(row["target"]) for row in rows], [1.5, 2.0])
        for row in rows:
            self.assertLessEqual(abs(float(row["nu_closed_form"]) - float(row["target"])), 1e-6)
            self.assertLess(float(row["gap"]), 0.1)

    def test_unresolvable_spike_is_reported_as_nan(self):
        with tempfile.TemporaryDirectory() as tmp:
            status, _, _ = run_cli(
                "gaussian-tune", "--d", "2", "--targets", "1.999",
                "-n", "256", "-R", "2", "--jobs", "1", "--out", tmp,
            )
            self.assertEqual(status, 0)
            _, (row,) = read_csv(Path(tmp) / "gaussian_tune.csv")
        self.assertAlmostEqual(float(row["nu_closed_form"]), 1.999, delta=1e-6)
        self.assertEqual(row["nu_hat"], "nan")

    def test_target_outside_range(self):
        status, _, stderr = run_cli("gaussian-tune", "--d", "10", "--targets", "0.5")
        self.assertEqual(status, 1)
        self.assertIn("not inside", stderr)


class OracleCompareCommandTests(TestCase):
    """End-to-end runs of oracle-compare."""

    def test_instances_from_config(self):
        instances = [
            {
                "name": "additive",
                "function": {"family": "synthetic_additive", "d": 3},
                "inputs": {"iid": {"kind": "finite_discrete", "values": [-1, 1], "probs": [0.5, 0.5]}, "d": 3},
            },
            {
                "name": "multiquadric",
                "function": {"family": "multiquadric_z", "p": 0.5, "d": 2, "mean_total": 3.0},
                "inputs": {"iid": {"kind": "finite_discrete", "values": [1, 2], "probs": [0.5, 0.5]}, "d": 2},
            },
        ]
        with tempfile.TemporaryDirectory() as tmp:
            config_path = Path(tmp) / "oracle.json"
            config_path.write_text(json.dumps({"experiment": "oracle-compare", "instances": instances}))
            status, _, _ = run_cli(
                "oracle-compare", "--config", str(config_path), "-R", "3", "--jobs", "1", "--out", tmp
            )
            self.assertEqual(status, 0)
            header, rows = read_csv(Path(tmp) / "oracle_compare.csv")
        self.assertEqual(tuple(header), ORACLE_COLUMNS)
        additive, multiquadric = rows
        self.assertEqual(float(additive["nu_exact"]), 1.0)
        self.assertEqual(additive["grid_size"], "8")
        self.assertAlmostEqual(float(multiquadric["nu_exact"]), 1.003613369518, places=10)
        for row in rows:
            self.assertEqual(row["passed"], "true")
            self.assertLess(float(row["jansen_max_rel_error"]), 1e-9)

    def test_malformed_instance(self):
        with tempfile.TemporaryDirectory() as tmp:
            config_path = Path(tmp) / "oracle.json"
            config_path.write_text(json.dumps({"instances": [{"name": "broken"}]}))
            status, _, stderr = run_cli("oracle-compare", "--config", str(config_path), "--out", tmp)
        self.assertEqual(status, 1)
        self.assertIn("missing", stderr)


class ExperimentConfigTests(TestCase):
    """Configuration layering and validation."""

    def test_defaults(self):
        config = ExperimentConfig.build(Experiment.MULTIQUADRIC_BOUND)
        self.assertEqual(config.d, (64, 256, 1024))
        self.assertEqual(config.p, (-1.0, -0.5, 0.5))
        self.assertEqual((config.shift, config.offset), ((0.0,), 0.0))
        self.assertEqual((config.n, config.replicates, config.seed), (2**14, 5, 20240229))
        self.assertEqual(ExperimentConfig.build("keister-sweep").d, tuple(range(2, 1001)))
        self.assertEqual(ExperimentConfig.build("oracle-compare").n, 2**12)
        self.assertGreaterEqual(ExperimentConfig.build("gaussian-tune").jobs, 1)

    def test_overrides_beat_file_values(self):
        config = ExperimentConfig.build(
            "gaussian-tune", {"d": 4, "targets": [2.0], "tol": 1e-6}, {"targets": [3.0], "tol": None}
        )
        self.assertEqual(config.targets, (3.0,))
        self.assertEqual(config.tol, 1e-6)

    def test_parse_d_values(self):
        self.assertEqual(parse_d_values("2..5"), (2, 3, 4, 5))
        self.assertEqual(parse_d_values("64,256, 1024"), (64, 256, 1024))
        self.assertEqual(parse_d_values(7), (7,))
        self.assertEqual(parse_d_values({"start": 3, "stop": 4}), (3, 4))
        for bad in ("a..b", True, {"start": 1}, 2.5j):
            with self.subTest(value=bad), self.assertRaises(ConfigError):
                parse_d_values(bad)

    def test_invalid_values(self):
        cases = [
            ("keister-sweep", {"n": 1000}),
            ("keister-sweep", {"replicates": 0}),
            ("keister-sweep", {"seed": -1}),
            ("keister-sweep", {"jobs": 0}),
            ("keister-sweep", {"z3_df": 3}),
            ("keister-sweep", {"d": [0, 2]}),
            ("keister-sweep", {"d": []}),
            ("keister-sweep", {"n": "many"}),
            ("multiquadric-bound", {"p": []}),
            ("multiquadric-bound", {"p": [0.0]}),
            ("multiquadric-bound", {"offset": -1.0}),
            ("multiquadric-bound", {"d": [4, 8], "shift": [0.0, 1.0, 0.0, 1.0]}),
            ("multiquadric-bound", {"shift": []}),
            ("gaussian-tune", {"targets": []}),
            ("gaussian-tune", {"d": 3, "targets": [3.0]}),
            ("gaussian-tune", {"d": 3, "targets": [2.0], "centers": [0.0]}),
            ("gaussian-tune", {"tol": 0.0}),
            ("oracle-compare", {"instances": [1, 2]}),
        ]
        for experiment, values in cases:
            with self.subTest(experiment=experiment, values=values), self.assertRaises(ConfigError):
                ExperimentConfig.build(experiment, values)

    def test_unknown_and_mismatched_keys(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig.build("keister-sweep", {"points": 64})
        with self.assertRaises(ConfigError):
            ExperimentConfig.build("keister-sweep", {"experiment": "gaussian-tune"})

    def test_log_transform_alone(self):
        config = ExperimentConfig.build("multiquadric-bound", {"p": [], "log_transform": True})
        self.assertEqual(config.p, ())

    def test_load_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "config.json"
            path.write_text("[1, 2]")
            with self.assertRaises(ConfigError):
                load_config_file(path)
            path.write_text("{not json")
            with self.assertRaises(ConfigError):
                load_config_file(path)
            path.write_text('{"d": "2..3"}')
            self.assertEqual(load_config_file(path), {"d": "2..3"})

    def test_to_dict(self):
        data = ExperimentConfig.build("keister-sweep", {"d": "2..3"}, {"jobs": 1}).to_dict()
        self.assertEqual(data["experiment"], "keister-sweep")
        self.assertEqual(data["d"], (2, 3))
        json.dumps(data)


class OutputFormatTests(TestCase):
    """CSV, Markdown and SVG writers."""

    def test_format_cell(self):
        self.assertEqual(format_cell(None), "")
        self.assertEqual(format_cell(True), "true")
        self.assertEqual(format_cell(0.1), "0.10000000000000001")
        self.assertEqual(format_cell(math.nan), "nan")
        self.assertEqual(format_cell("pooled"), "pooled")
        self.assertEqual(format_cell(3), "3")

    def test_csv_table(self):
        table = CsvTable(("d", "nu", "note"), [{"d": 2, "nu": 1.5}, {"d": 3, "nu": 2.0, "note": "a,b"}])
        self.assertEqual(table.to_string(), 'd,nu,note\r\n2,1.5,\r\n3,2,"a,b"\r\n')

    def test_markdown_table(self):
        text = str(Table([{"d": 10, "nu": 1.0841234567}]))
        self.assertEqual(text, "| d | nu |\n| --- | --- |\n| 10 | 1.08412 |")

    def test_line_chart(self):
        chart = LineChart("title", "x", "y")
        chart.add_trace([1.0, 2.0, 3.0], [1.0, 1.5, 2.0])
        chart.add_reference(1.0)
        first = chart.to_string(timestamp="2024-01-01T00:00:00+00:00")
        second = chart.to_string(timestamp="2025-06-30T12:00:00+00:00")
        self.assertNotEqual(first, second)
        self.assertEqual(strip_timestamp(first), strip_timestamp(second))
        self.assertIn("<!-- generated 2024-01-01T00:00:00+00:00 -->", first)
        self.assertTrue(first.rstrip().endswith("</svg>"))

    def test_summarize_marks_peaks_and_troughs(self):
        reports = [estimate_mean_dimension_radial(Keister(d=d), 256, 2, 1) for d in range(2, 50)]
        rows = summarize(reports)
        regimes = {row["d"]: row["regime"] for row in rows}
        self.assertEqual(regimes.get(10), "trough")
        self.assertEqual(regimes.get(39), "peak")
        self.assertEqual(summarize([]), [])
