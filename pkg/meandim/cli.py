"""
Command-line entry point.

``meandim <subcommand> [options]`` dispatches to the ``Command`` class of the
subcommand. Errors raised by the library are reported on one line with exit
status 1; usage errors keep argparse's status 2.
"""

import argparse
import logging
import sys

from meandim import __version__
from meandim.commands import gaussian_tune, keister_sweep, multiquadric_bound, oracle_compare
from meandim.exceptions import MeanDimError

logger = logging.getLogger(__name__)

COMMANDS = {
    "keister-sweep": keister_sweep.Command,
    "multiquadric-bound": multiquadric_bound.Command,
    "gaussian-tune": gaussian_tune.Command,
    "oracle-compare": oracle_compare.Command,
}

# -v levels: 0 errors only, 1 warnings, 2 info, 3 debug
VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="meandim",
        description="Mean dimension experiments for radial basis functions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command_class in COMMANDS.items():
        command = command_class()
        subparser = subparsers.add_parser(name, help=command.help, description=command.help)
        command.add_arguments(subparser)
        subparser.add_argument(
            "-v",
            "--verbosity",
            type=int,
            choices=sorted(VERBOSITY_LEVELS),
            default=1,
            help="0 errors only, 1 warnings, 2 progress, 3 debug.",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    """
    Run the command line.

    Args:
        argv: Arguments without the program name; ``sys.argv[1:]`` when None

    Returns:
        Exit status
    """
    options = vars(build_parser().parse_args(argv))
    logging.basicConfig(
        level=VERBOSITY_LEVELS[options["verbosity"]],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    command = COMMANDS[options["command"]]()
    try:
        written = command.handle(**options)
    except MeanDimError as err:
        print(f"meandim {options['command']}: {err}", file=sys.stderr)
        return 1
    for path in written:
        logger.info("Wrote %s", path)
    return 0
