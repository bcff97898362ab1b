"""Command line

This module provides the gridlag command: run, sweep, compare and fixtures.
"""

import os
import sys
import json
import argparse
import logging
import logging.config

from gridlag import harness
from gridlag.influx import Influx, add_arguments as add_influx_arguments
from gridlag.scenarios import (BALL_GUARD_CHOICES, PRESETS, ConfigError, load_config,
                               load_presets, override)

log = logging.getLogger(__name__)

LOGGING_CONFIG = os.path.join(os.path.dirname(__file__), 'logging_config.json')


def add_arguments(parser):

    parser.add_argument('--seed', type=int, default=os.getenv('GRIDLAG_SEED'),
                        help='override the scenario seed')
    parser.add_argument('--out', default=os.getenv('GRIDLAG_OUT', '.'),
                        help='directory for metrics CSV files')
    parser.add_argument('--ball-guard', dest='ball_guard', choices=BALL_GUARD_CHOICES,
                        default=os.getenv('GRIDLAG_BALL_GUARD'),
                        help='ball displacement guard of the predictor')
    parser.add_argument('--presets', default=os.getenv('GRIDLAG_PRESETS'),
                        help='extra transport presets YAML merged over the packaged ones')
    parser.add_argument('--debug', '-d', action='store_const',
                        default=logging.INFO, const=logging.DEBUG,
                        help='enable debug logging (default=INFO)')


def setup_logging(level=logging.INFO, path=LOGGING_CONFIG):
    """Configure logging from the packaged dictConfig.

    Logs are shipped to logstash only when GRIDLAG_LOGSTASH_HOST is set.
    """
    with open(path, 'r') as configfile:
        config = json.load(configfile)

    host = os.getenv('GRIDLAG_LOGSTASH_HOST')
    if host:
        config['handlers']['logstash']['host'] = host
        config['handlers']['logstash']['port'] = int(os.getenv('GRIDLAG_LOGSTASH_PORT', 5000))
    else:
        del config['handlers']['logstash']
        del config['loggers']['gridlag.harness']

    config['root']['level'] = logging.getLevelName(level)
    logging.config.dictConfig(config)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    add_arguments(common)
    add_influx_arguments(common)

    parser = argparse.ArgumentParser(prog='gridlag',
                                     description='Adaptive grid game-state prediction experiments')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    run_parser = commands.add_parser('run', parents=[common], help='run one scenario')
    run_parser.add_argument('config', help='scenario YAML file')

    sweep_parser = commands.add_parser('sweep', parents=[common], help='sweep one parameter')
    sweep_parser.add_argument('config', help='scenario YAML file')
    sweep_parser.add_argument('--param', required=True, choices=harness.SWEEP_PARAMETERS)
    sweep_parser.add_argument('--values', required=True, type=parse_values,
                              help='comma separated values, e.g. 50,500,5000')

    compare_parser = commands.add_parser('compare', parents=[common],
                                         help='grid predictor against dead reckoning')
    compare_parser.add_argument('config', help='scenario YAML file')

    commands.add_parser('fixtures', parents=[common], help='check the fixture scenarios')
    return parser


def parse_values(text):
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('values must be numbers: "{}"'.format(text))
    if not values:
        raise argparse.ArgumentTypeError('at least one value is required')
    return values


def _load(args, presets):
    config = load_config(args.config, presets)
    return override(config, presets, seed=args.seed, ball_guard=args.ball_guard)


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging(args.debug)

    try:
        presets = load_presets(args.presets, base=PRESETS) if args.presets else PRESETS

        if args.command == 'run':
            result = harness.run(_load(args, presets), out_dir=args.out, presets=presets,
                                 influx=Influx.from_args(args))
            print(result.final_hash)

        elif args.command == 'sweep':
            rows = harness.sweep(_load(args, presets), args.param, args.values,
                                 out_dir=args.out, presets=presets)
            print('value\terror_mean\tmean_interval\tstall_fraction\tball_displacement')
            for row in rows:
                print('{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}'.format(
                    row.value, row.error_mean, row.mean_interval, row.stall_fraction,
                    row.ball_displacement))

        elif args.command == 'compare':
            rows = harness.compare(_load(args, presets), out_dir=args.out, presets=presets)
            print('predictor\tpredicted_ticks\terror_mean\terror_max')
            for row in rows:
                print('{}\t{}\t{:.6f}\t{:.6f}'.format(row.predictor, row.predicted_ticks,
                                                     row.error_mean, row.error_max))

        else:
            results = harness.fixtures()
            for result in results:
                print('{}\t{}{}'.format(result.name, 'ok' if result.passed else 'FAILED',
                                        '\t' + result.message if result.message else ''))
            failed = [r for r in results if not r.passed]
            if failed:
                log.error('fixture %s failed: %s', failed[0].name, failed[0].message)
                return 1

    except ConfigError as exc:
        log.error('invalid scenario: %s', exc)
        return 2
    except (OSError, ValueError) as exc:
        log.error('%s', exc)
        return 1

    return 0


if __name__ == '__main__':
    sys.exit(main())
