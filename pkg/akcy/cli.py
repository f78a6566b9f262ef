"""Command-line entry point ``akcy``."""

import argparse
import logging
import sys

from . import __version__, runner
from .config import load_config
from .exc import ConfigError
from .spectral import fft_workers

logger = logging.getLogger(__name__)


def _epsilons(value):
    try:
        epsilons = [float(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'not a comma separated list of numbers: {value!r}')
    if not epsilons or any(epsilon < 0 for epsilon in epsilons):
        raise argparse.ArgumentTypeError('epsilons must be a non-empty list of numbers >= 0')
    return epsilons


def build_parser():
    parser = argparse.ArgumentParser(
        prog='akcy',
        description='Almost-Kähler Calabi-Yau solver on the flat 4-torus.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='log at DEBUG level')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='log warnings and errors only')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='solve the configured scenario by continuation')
    run.add_argument('config', help='TOML run configuration')

    check = commands.add_parser('check', help='run the property suites')
    check.add_argument('config', help='TOML run configuration')
    check.add_argument(
        '--suite',
        action='append',
        dest='suites',
        choices=sorted(runner.SUITE_NAMES),
        help='run only this suite (repeatable)',
    )

    diagnose = commands.add_parser('diagnose', help='diagnostics of a dumped solution')
    diagnose.add_argument('dump', help='field dump of w\'')
    diagnose.add_argument('config', help='TOML run configuration')
    diagnose.add_argument('--t', type=float, default=1.0, help='continuation parameter of the dump')

    sweep = commands.add_parser('sweep', help='one run per Nijenhuis magnitude epsilon')
    sweep.add_argument('config', help='TOML run configuration')
    sweep.add_argument('--eps', type=_epsilons, required=True, help='comma separated epsilons')
    return parser


def _configure_logging(args, config):
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, config.outputs.log_level if config else 'INFO')
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        fft_workers()
    except ConfigError as error:
        _configure_logging(args, None)
        logger.error('configuration error: %s', error)
        return runner.EXIT_CONFIG
    _configure_logging(args, config)
    try:
        if args.command == 'run':
            report = runner.run(config)
        elif args.command == 'check':
            report = runner.check(config, names=args.suites)
        elif args.command == 'diagnose':
            report = runner.diagnose(args.dump, config, t=args.t)
        else:
            report = runner.sweep(config, args.eps)
    except ConfigError as error:
        logger.error('configuration error: %s', error)
        return runner.EXIT_CONFIG
    return report.exit_code


if __name__ == '__main__':
    sys.exit(main())
