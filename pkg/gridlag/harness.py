"""Harness

This module provides the experiment verbs behind the command line: a single
seeded run, parameter sweeps, the grid predictor versus dead-reckoning
comparison, and the fixture checks of the worked layout examples.
"""

import os
import datetime
import logging
from dataclasses import dataclass, fields

from gridlag.game import default_state, state_hash, validate
from gridlag.kinematics import TOLERANCE, player_move_candidates
from gridlag.metrics import as_row, summarize, write_csv
from gridlag.scenarios import fixture_path, load_config, override, resolve_link
from gridlag.server import MODE_DR, MODE_GRID, Match

log = logging.getLogger(__name__)

SWEEP_PARAMETERS = ('L', 'G', 'loss_prob')
FIXTURES = ('mdr_layout', 'fine_lattice', 'possession')


def log_info(scenario, msg):
    """Standard format for scenario logs regarding progress."""
    log.info('[%s] %s', scenario, msg)


def log_error(scenario, msg):
    """Standard format for scenario logs regarding errors/failures."""
    log.error('[%s] %s', scenario, msg)


def log_skip(scenario, msg):
    """Standard format for scenario logs regarding skipped work."""
    log.info('[%s] SKIP: %s', scenario, msg)


@dataclass(frozen=True)
class RunResult:
    config: object
    records: tuple
    final_hash: str
    state: object
    truth: object
    summary: dict
    csv_path: str = None


@dataclass(frozen=True)
class SweepRow:
    value: float
    error_mean: float
    mean_interval: float
    stall_fraction: float
    ball_displacement: float
    predicted_ticks: int
    final_hash: str


@dataclass(frozen=True)
class CompareRow:
    predictor: str
    predicted_ticks: int
    error_mean: float
    error_max: float


@dataclass(frozen=True)
class FixtureResult:
    name: str
    passed: bool
    message: str = ''


def _out_path(out_dir, filename):
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    return os.path.join(out_dir, filename)


def run(config, out_dir=None, presets=None, influx=None):
    """Play one scenario to completion.

    Returns:
        RunResult with the records, the final-state hash and, when out_dir is
        given, the path of the metrics CSV
    """
    started = datetime.datetime.now().isoformat()
    match = Match(config, presets)
    records = tuple(match.run())
    summary = summarize(records)
    final_hash = state_hash(match.state)

    csv_path = None
    if out_dir:
        csv_path = _out_path(out_dir, '{}.csv'.format(config.name))
        write_csv(records, csv_path)
    if influx is not None:
        if not influx.log(config.name, started, datetime.datetime.now().isoformat(), summary):
            log_skip(config.name, 'no InfluxDB password, summary not pushed')

    log_info(config.name, '{} ticks, {} predicted, {} lost inputs, hash {}'.format(
        summary['ticks'], summary['predicted_ticks'], match.lost, final_hash))
    return RunResult(config=config, records=records, final_hash=final_hash, state=match.state,
                     truth=match.shadow, summary=summary, csv_path=csv_path)


def _swept(config, parameter, value, presets):
    name = '{}-{}-{}'.format(config.name, parameter, value)
    if parameter == 'L':
        # L is pinned so the lattice follows the swept value alone
        return override(config, presets, name=name, latency_ms=float(value), adaptive=False)
    if parameter == 'G':
        return override(config, presets, name=name, game_level=value)

    def lossy(link):
        conditions = resolve_link(link, presets)
        return dict(base_latency_ms=conditions.base_latency_ms,
                    jitter_ms=conditions.jitter_ms, loss_prob=float(value))

    server_link = lossy(config.server_link) if config.server_link else None
    return override(config, presets, name=name, link=lossy(config.link), server_link=server_link)


def sweep(config, parameter, values, out_dir=None, presets=None):
    """One run per value with a constant seed, aggregated per value.

    Raises:
        ValueError on an unknown parameter or an empty value list
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError('unknown sweep parameter "{}", expected one of {}'.format(
            parameter, ', '.join(SWEEP_PARAMETERS)))
    if not values:
        raise ValueError('sweep needs at least one value')

    rows = []
    for value in sorted(values):
        result = run(_swept(config, parameter, value, presets), presets=presets)
        summary = result.summary
        rows.append(SweepRow(value=float(value), error_mean=summary['error_mean'],
                             mean_interval=summary['mean_interval'],
                             stall_fraction=summary['stall_fraction'],
                             ball_displacement=summary['ball_displacement'],
                             predicted_ticks=summary['predicted_ticks'],
                             final_hash=result.final_hash))

    if out_dir:
        write_csv(rows, _out_path(out_dir, '{}_sweep_{}.csv'.format(config.name, parameter)),
                  columns=[f.name for f in fields(SweepRow)])
    return rows


def compare(config, out_dir=None, presets=None):
    """Run the grid predictor and the dead-reckoning baseline on identical inputs."""
    rows = []
    for mode in (MODE_GRID, MODE_DR):
        result = run(override(config, presets, name='{}-{}'.format(config.name, mode),
                              predictor=mode), presets=presets)
        summary = result.summary
        rows.append(CompareRow(predictor=mode, predicted_ticks=summary['predicted_ticks'],
                               error_mean=summary['predicted_error_mean'],
                               error_max=summary['predicted_error_max']))

    if out_dir:
        write_csv(rows, _out_path(out_dir, '{}_compare.csv'.format(config.name)),
                  columns=[f.name for f in fields(CompareRow)])
    return rows


def _close(a, b):
    return all(abs(u - v) <= TOLERANCE for u, v in zip(a, b))


def _same_points(found, expected):
    if len(found) != len(expected):
        return False
    return all(any(_close(f, e) for f in found) for e in expected)


def check_mdr_layout(config):
    state = default_state(config)
    expected = {(1, 2), (1, 4), (3, 2), (3, 4)}
    if set(state.mdr.corners) != expected:
        return 'MDR corners {} != {}'.format(sorted(state.mdr.corners), sorted(expected))
    return None


def check_fine_lattice(config):
    state = default_state(config)
    spec = config.grid_spec()
    if abs(spec.interval - 0.02) > TOLERANCE:
        return 'interval {} != 0.02'.format(spec.interval)
    lattice = spec.lattice
    for value in (0.64, 0.66, 0.92):
        if not lattice.contains(value):
            return 'lattice lacks {}'.format(value)

    player = state.player(1)
    expected = [(0.66, 0.92), (0.64, 0.92), (0.68, 0.92), (0.66, 0.90), (0.66, 0.94)]
    found = player_move_candidates(player, spec.interval, spec.bounds)
    if not _same_points(found, expected):
        return 'candidates {} != {}'.format(sorted(found), expected)
    violations = validate(state, spec)
    if violations:
        return violations[0]
    return None


def check_possession(config):
    state = default_state(config)
    spec = config.grid_spec()
    holder = state.holder
    if holder is None or not _close(holder.ground, (6.0, 5.5)):
        return 'no holder at (6.0, 5.5)'
    if not _close(state.ball.ground, (6.0, 5.5)):
        return 'ball not at (6.0, 5.5)'
    if not _close(state.player(2).ground, (5.0, 4.5)):
        return 'second player not at (5.0, 4.5)'
    violations = validate(state, spec)
    if violations:
        return violations[0]
    return None


CHECKS = {
    'mdr_layout': check_mdr_layout,
    'fine_lattice': check_fine_lattice,
    'possession': check_possession,
}


def check_replay(config):
    """Two runs with the same seed must agree byte for byte."""
    first = run(config)
    second = run(config)
    if first.final_hash != second.final_hash:
        return 'final-state hashes differ between identical runs'
    if [as_row(r) for r in first.records] != [as_row(r) for r in second.records]:
        return 'metrics differ between identical runs'
    return None


def fixtures(names=FIXTURES):
    """Run the fixture scenarios and their layout assertions.

    Returns:
        list of FixtureResult in the given order
    """
    results = []
    for name in names:
        try:
            config = load_config(fixture_path(name))
            failure = CHECKS[name](config) or check_replay(config)
        except (ValueError, KeyError) as exc:
            failure = str(exc)

        if failure:
            log_error(name, failure)
            results.append(FixtureResult(name=name, passed=False, message=failure))
        else:
            log_info(name, 'fixture passed')
            results.append(FixtureResult(name=name, passed=True))
    return results
