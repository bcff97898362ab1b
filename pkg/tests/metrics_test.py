import pytest
from dataclasses import replace

from gridlag.game import InputEvent, default_state, step
from gridlag.metrics import *
from gridlag.scenarios import ScenarioConfig

CONFIG = ScenarioConfig(formation=((4, 5), (2, 2)), ball_start=(8, 8), mu=10)


def _record(tick, **changes):
    values = dict(tick=tick, latency_ms=100.0, rho=1.0, interval=1.0, predicted=False,
                  error_mean=0.0, error_max=0.0, unfrozen=2, messages=4, repartition=False)
    values.update(changes)
    return MetricsRecord(**values)


def test_columns_fixed():
    assert COLUMNS == ('tick', 'latency_ms', 'rho', 'interval', 'predicted', 'error_mean',
                       'error_max', 'unfrozen', 'messages', 'repartition', 'reconciled',
                       'ball_step', 'stalled')


def test_as_row():
    row = as_row(_record(3, predicted=True, error_mean=0.5))
    assert row == ['3', '100.000000', '1.000000', '1.000000', '1', '0.500000', '0.000000',
                   '2', '4', '0', '0', '0.000000', '0']


def test_prediction_error_in_lattice_steps():
    state = default_state(CONFIG)
    spec = CONFIG.grid_spec()
    off = replace(state, players=(replace(state.players[0], x=6.0, y=6.0), state.players[1]))
    # two steps along x plus one I_y step on one of three entities
    assert prediction_error(off, state, spec.i_y) == (1.0, 3.0)
    assert prediction_error(state, state, spec.i_y) == (0.0, 0.0)


def test_prediction_error_needs_same_players():
    state = default_state(CONFIG)
    with pytest.raises(ValueError):
        prediction_error(replace(state, players=state.players[:1]), state, 2.0)


def test_ball_step_and_stall():
    state = default_state(CONFIG)
    spec = CONFIG.grid_spec()
    assert is_stalled(state, step(state, [], spec))
    moved = step(state, [InputEvent.move(1, 'x', 1)], spec)
    assert not is_stalled(state, moved)
    assert ball_step(state, moved) == 0.0


def test_write_csv(tmp_path):
    path = str(tmp_path / 'run.csv')
    write_csv([_record(1), _record(2, repartition=True)], path)
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0] == ','.join(COLUMNS)
    assert len(lines) == 3
    assert lines[2].split(',')[9] == '1'


def test_summarize():
    records = [_record(1), _record(2, predicted=True, error_mean=2.0, error_max=4.0,
                                   interval=0.5, stalled=True, ball_step=1.0)]
    summary = summarize(records)
    assert summary['ticks'] == 2
    assert summary['predicted_ticks'] == 1
    assert summary['error_mean'] == pytest.approx(1.0)
    assert summary['predicted_error_max'] == pytest.approx(4.0)
    assert summary['mean_interval'] == pytest.approx(0.75)
    assert summary['stall_fraction'] == pytest.approx(0.5)
    assert summary['ball_displacement'] == pytest.approx(0.5)
    assert summary['messages'] == 8


def test_summarize_empty():
    with pytest.raises(ValueError):
        summarize([])
