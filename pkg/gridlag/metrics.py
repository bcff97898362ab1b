"""Metrics

This module provides the per-tick metrics record, the prediction error
measure against the lossless shadow run, and deterministic CSV output.

Column order is fixed; see README.md.
"""

import csv
import logging
from dataclasses import dataclass, astuple, fields

import numpy as np

log = logging.getLogger(__name__)

FLOAT_FORMAT = '{:.6f}'


@dataclass(frozen=True)
class MetricsRecord:
    tick: int
    latency_ms: float
    rho: float
    interval: float
    predicted: bool
    error_mean: float
    error_max: float
    unfrozen: int
    messages: int
    repartition: bool
    reconciled: bool = False
    ball_step: float = 0.0
    stalled: bool = False


COLUMNS = tuple(f.name for f in fields(MetricsRecord))


def _format(value):
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, float):
        return FLOAT_FORMAT.format(value)
    return str(value)


def as_row(record):
    return [_format(v) for v in astuple(record)]


def entity_positions(state):
    """Rows of (x, y, z) for every player in id order, then the ball."""
    rows = [p.pos for p in state.players]
    rows.append(state.ball.pos)
    return np.array(rows, dtype=float)


def prediction_error(state, truth, i_y):
    """Per-entity distance in lattice steps between a state and ground truth.

    Each entity contributes |dx|/I + |dz|/I + |dy|/I_y, using the truth's I.

    Returns:
        (mean, max) rounded to 6 decimals
    """
    if state.player_ids != truth.player_ids:
        raise ValueError('states hold different players')

    diff = np.abs(entity_positions(state) - entity_positions(truth))
    steps = (diff[:, 0] + diff[:, 2]) / truth.interval + diff[:, 1] / i_y
    return round(float(np.mean(steps)), 6), round(float(np.max(steps)), 6)


def ball_step(before, after):
    """Ground displacement of the ball between two states, in screen units."""
    return float(np.hypot(after.ball.x - before.ball.x, after.ball.z - before.ball.z))


def is_stalled(before, after):
    """True when no player and not the ball changed position."""
    return bool(np.allclose(entity_positions(before), entity_positions(after), rtol=0, atol=1e-12))


def write_csv(records, path, columns=COLUMNS):
    """Write one row per record under a fixed header."""
    with open(path, 'w', newline='') as csvfile:
        writer = csv.writer(csvfile, lineterminator='\n')
        writer.writerow(columns)
        for record in records:
            writer.writerow(as_row(record))
    log.debug('wrote %s metrics rows to %s', len(records), path)


def summarize(records):
    """Aggregate a run's records into the figures reported by sweeps and comparisons."""
    if not records:
        raise ValueError('no metrics records to summarize')

    predicted = [r for r in records if r.predicted]
    return {
        'ticks': len(records),
        'predicted_ticks': len(predicted),
        'error_mean': float(np.mean([r.error_mean for r in records])),
        'predicted_error_mean': float(np.mean([r.error_mean for r in predicted])) if predicted else 0.0,
        'predicted_error_max': float(np.max([r.error_max for r in predicted])) if predicted else 0.0,
        'mean_interval': float(np.mean([r.interval for r in records])),
        'stall_fraction': float(np.mean([r.stalled for r in records])),
        'ball_displacement': float(np.mean([r.ball_step for r in records])),
        'messages': int(np.sum([r.messages for r in records])),
        'repartitions': sum(1 for r in records if r.repartition),
    }
