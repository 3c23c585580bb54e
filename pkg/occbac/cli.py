"""
Command line entry point.

    occbac run <config> [--seed N] [--trials N] [--jobs N] [--out-dir DIR]
    occbac export <scenario> <field> <out>
    occbac selfcheck [--seed N]

Exit codes: 0 success, 1 unexpected error, 2 config error, 3 capacity
error, 4 I/O error, 5 inconsistent measurement, 6 self-check failure,
7 scenario format error.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from occbac import __version__
from occbac.connectors.image_export import DEFAULT_PIXELS_PER_CELL, export_grid_image
from occbac.connectors.scenario_file import load_field, load_scenario
from occbac.orchestrator.experiment import ExperimentOrchestrator
from occbac.utils.errors import IO_EXIT_CODE, OccbacError
from occbac.validators.selfcheck import run_selfcheck

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = "OCCBAC_LOG_LEVEL"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="occbac",
        description="Occupancy-grid estimation with dependent cells: experiments, image export and self-checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help=f"Logging level (default: ${LOG_LEVEL_ENV} or INFO)",
    )
    parser.add_argument("--quiet", action="store_true", help="Hide progress bars")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    run = commands.add_parser("run", help="Run an experiment config")
    run.add_argument("config", help="Experiment YAML/JSON file")
    run.add_argument("--seed", type=int, default=None, help="Override the master seed")
    run.add_argument("--trials", type=int, default=None, help="Override the trial count")
    run.add_argument("--jobs", type=int, default=None, help="Worker processes for trials")
    run.add_argument("--out-dir", default=None, help="Output directory (default: config, then $OCCBAC_OUTPUT_DIR)")

    export = commands.add_parser("export", help="Render a field file as a PGM image")
    export.add_argument("scenario", help="Scenario file providing the grid")
    export.add_argument("field", help="Field file (one probability per cell)")
    export.add_argument("out", help="Output .pgm path")
    export.add_argument("--pixels-per-cell", type=int, default=DEFAULT_PIXELS_PER_CELL, help="Pixel block size")

    selfcheck = commands.add_parser("selfcheck", help="Run the oracle suite")
    selfcheck.add_argument("--seed", type=int, default=0, help="Seed of the randomized instances")
    return parser


def _run(args: argparse.Namespace) -> int:
    overrides = {"seed": args.seed, "trials": args.trials, "jobs": args.jobs, "output_dir": args.out_dir}
    orchestrator = ExperimentOrchestrator(args.config, overrides)
    result = orchestrator.run(show_progress=not args.quiet)
    print(f"{result['trials']} trial(s) written to {result['output_dir']}")
    for method, stats in result["summary"].items():
        print(
            f"  {method:>8}  rho {stats['rho_mean']:.4f} +/- {stats['rho_std']:.4f}"
            f"  SJSD {stats['sjsd_mean']:.4g} +/- {stats['sjsd_std']:.4g}"
        )
    return 0


def _export(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    field, field_spec = load_field(args.field)
    if field_spec != scenario.spec:
        raise ValueError(f"field grid {field_spec} does not match scenario grid {scenario.spec}")
    export_grid_image(field, scenario.spec, args.out, args.pixels_per_cell)
    return 0


def _selfcheck(args: argparse.Namespace) -> int:
    for result in run_selfcheck(args.seed):
        print(f"  ok  {result.name}: {result.detail}")
    return 0


COMMANDS = {"run": _run, "export": _export, "selfcheck": _selfcheck}


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch the command and map failures to exit codes."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level or os.environ.get(LOG_LEVEL_ENV, "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return COMMANDS[args.command](args)
    except OccbacError as e:
        logger.error(str(e))
        return e.exit_code
    except OSError as e:
        logger.error(str(e))
        return IO_EXIT_CODE
    except ValueError as e:
        logger.error(str(e))
        return 2
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
