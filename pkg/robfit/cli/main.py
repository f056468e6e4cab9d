"""Command line front end of robfit.

Exit codes: 0 success (also for a solve that did not converge), 1 input, output or configuration error,
2 failed verification, 3 solver error (singular system).
"""

#  Copyright (c) 2021 robfit
import argparse
import logging
import os
import sys
from typing import List, Optional

from .. import settings
from ..util.exception import (ConfigError, DomainError, PointCloudFormatError, ResidualFileError,
                              SceneFormatError, SolverError, TableFormatError)
from ..util.logging import detach_file_handlers, get_logger
from .commands import EXIT_IO, EXIT_SOLVER, output_directory, run_command, seed_from
from .config import load_run_config

LOG_FILE = 'robfit.log'


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help='YAML run configuration, the defaults without.')
    common.add_argument('--seed', type=int, default=None, help='Master seed, overrides problem.seed.')
    common.add_argument('--output-dir', default=None,
                        help='Directory of all outputs, overrides output.directory and ROBFIT_OUTPUT_DIR.')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='More console logging, repeat for debug output.')
    return common


def _add_scale(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--c', type=float, default=None,
                        help='Kernel scale in units of the residual, overrides kernel.c.')


def _add_compare(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--compare', default=None,
                        help='Comma separated policies solved on the same data, e.g. adaptive,squared.')


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    formatter = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog='robfit', description='Robust fitting with adaptive kernels.',
                                     formatter_class=formatter)
    subparsers = parser.add_subparsers(dest='command', required=True)

    table = subparsers.add_parser('partition-table', parents=[common], formatter_class=formatter,
                                  help='Build or verify the partition function table.')
    table.add_argument('path', nargs='?', default=None,
                       help='Table file, <output-dir>/partition_table.txt if not given.')
    table.add_argument('--verify', action='store_true',
                       help='Recompute the table with halved quadrature step and compare.')
    table.add_argument('--tolerance', type=float, default=1e-8, help='Largest deviation accepted by --verify.')
    table.add_argument('--intervals', type=int, default=None,
                       help='Quadrature intervals of the build, settings.options.quadrature_intervals if not given.')

    estimate = subparsers.add_parser('estimate-alpha', parents=[common], formatter_class=formatter,
                                     help='Estimate the kernel shape of a residual file.')
    estimate.add_argument('residuals', help='Text file with one residual per line.')
    _add_scale(estimate)
    estimate.add_argument('--table', default=None, help='Partition table file, built if not given.')
    estimate.add_argument('--output', default=None, help='JSON output file, stdout if not given.')

    fit = subparsers.add_parser('fit', parents=[common], formatter_class=formatter,
                                help='Robust line fit of problem.input or of a synthetic line.')
    _add_scale(fit)
    _add_compare(fit)

    icp = subparsers.add_parser('icp', parents=[common], formatter_class=formatter,
                                help='Register two point clouds or a synthetic scan sequence.')
    _add_scale(icp)
    _add_compare(icp)
    icp.add_argument('--frames', type=int, default=0,
                     help='Register a synthetic sequence of this many frames and write the per frame alpha.')

    ba = subparsers.add_parser('ba', parents=[common], formatter_class=formatter,
                               help='Bundle adjustment of problem.input or of a synthetic scene.')
    _add_scale(ba)
    _add_compare(ba)

    sweep = subparsers.add_parser('basin-sweep', parents=[common], formatter_class=formatter,
                                  help='Convergence rates of bundle adjustment under perturbed initial poses.')
    _add_scale(sweep)
    sweep.add_argument('--sigmas', default=None, help='Comma separated noise levels in meters, overrides sweep.sigmas.')
    sweep.add_argument('--samples', type=int, default=None, help='Samples per noise level, overrides sweep.samples.')
    sweep.add_argument('--policies', default=None, help='Comma separated policies, overrides sweep.policies.')

    curves = subparsers.add_parser('curves', parents=[common], formatter_class=formatter,
                                   help='Loss, weight and density curves as CSV.')
    _add_scale(curves)
    curves.add_argument('--alphas', default='2,1,0,-2,-10', help='Comma separated shape values.')
    curves.add_argument('--r-max', type=float, default=10., help='Largest |r| in units of c.')
    curves.add_argument('--points', type=int, default=401, help='Number of residual values.')
    curves.add_argument('--table', default=None, help='Partition table file, built if not given.')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    stdout_level = max(logging.WARNING - 10 * args.verbose, logging.DEBUG)
    logger = get_logger('robfit', stdout_level=stdout_level)
    try:
        config = load_run_config(args.config)
        args.seed = seed_from(args, config)
        args.output_dir = output_directory(args, config)
        os.makedirs(args.output_dir, exist_ok=True)
    except (ConfigError, OSError) as error:
        logger.error(str(error))
        return EXIT_IO
    logger = get_logger('robfit', stdout_level=stdout_level, file_level=logging.INFO,
                        file_name=os.path.join(args.output_dir, LOG_FILE))
    settings.set_seed(args.seed)
    logger.info(f"robfit {args.command} with seed {args.seed}, output to {args.output_dir}")
    try:
        return run_command(args, config)
    except SolverError as error:
        logger.error(f"Solver error: {error}")
        return EXIT_SOLVER
    except (ConfigError, DomainError, OSError, PointCloudFormatError, ResidualFileError, SceneFormatError,
            TableFormatError) as error:
        logger.error(str(error))
        return EXIT_IO
    finally:
        detach_file_handlers('robfit')


if __name__ == '__main__':
    sys.exit(main())
