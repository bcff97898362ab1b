import pytest
from dataclasses import replace

from gridlag.bots import build_script
from gridlag.game import default_state, step
from gridlag.kinematics import BallState
from gridlag.predictor import *
from gridlag.scenarios import ScenarioConfig

# three bots moving one lattice step per tick, ball loose in a corner
ORACLE = ScenarioConfig(name='oracle', duration=21, clients=3, latency_ms=1000, mu=100,
                        adaptive=False, script='constant',
                        formation=((3, 3), (5, 2), (7, 7)), ball_start=(1, 9),
                        directions={1: '+x', 2: '+z', 3: '-x'})


def _lossless(config=ORACLE):
    spec = config.grid_spec()
    state = default_state(config)
    script = build_script(config, state.player_ids)
    states = [state]
    for tick in range(1, config.duration + 1):
        state = step(state, script.events(tick, state.player_ids), spec)
        states.append(state)
    return spec, states


@pytest.fixture
def walk():
    return _lossless()


def _with_player(state, player_id, **changes):
    players = tuple(replace(p, **changes) if p.id == player_id else p for p in state.players)
    return replace(state, players=players)


@pytest.mark.parametrize("n", range(2, 21))
def test_drop_one_reproduces_lossless_state(n, walk):
    spec, states = walk
    pair = StatePair(prev2=states[n - 2], prev1=states[n - 1])
    assert predict_state(pair, spec) == states[n]


def test_predict_ahead_bridges_gap(walk):
    spec, states = walk
    predicted = predict_ahead(StatePair(states[3], states[4]), spec, 5)
    assert [s.index for s in predicted] == [5, 6, 7, 8, 9]
    assert predicted[-1] == states[9]


def test_pair_requires_increasing_time(walk):
    spec, states = walk
    with pytest.raises(ValueError):
        StatePair(prev2=states[2], prev1=states[1])


def test_pair_from_history(walk):
    spec, states = walk
    with pytest.raises(NotEnoughHistory):
        pair_from_history(states[:1], spec)
    pair = pair_from_history(states[:4], spec)
    assert pair.prev1 is states[3]
    assert pair.interval == states[3].interval


def test_make_pair_resnaps_older_state(walk):
    spec, states = walk
    coarse = replace(spec, interval=0.5)
    pair = make_pair(states[1], replace(states[2], interval=0.5), coarse)
    assert pair.prev2.interval == 0.5


def test_player_motionless():
    spec, states = _lossless(replace(ORACLE, script='idle'))
    pair = StatePair(states[1], states[2])
    assert predict_player(1, pair, spec, spec.i_y) == states[2].player(1).pos


def test_player_clamped_at_field_edge(walk):
    spec, states = walk
    before = _with_player(states[1], 1, x=9.8)
    last = _with_player(states[2], 1, x=9.9)
    x, _, _ = predict_player(1, StatePair(before, last), spec, spec.i_y)
    assert x == pytest.approx(spec.x_max - spec.interval)


def test_player_jump_comes_down():
    spec, states = _lossless(replace(ORACLE, script='idle'))
    last = _with_player(states[2], 1, y=4 + spec.i_y)
    assert predict_player(1, StatePair(states[1], last), spec, spec.i_y)[1] == 4


def test_player_diagonal_retained():
    spec, states = _lossless(replace(ORACLE, script='idle'))
    p = states[2].player(1)
    last = _with_player(states[2], 1, x=p.x + spec.interval, z=p.z + spec.interval)
    assert predict_player(1, StatePair(states[1], last), spec, spec.i_y) == \
        last.player(1).pos


def test_player_missing_from_pair(walk):
    spec, states = walk
    with pytest.raises(MissingEntityError):
        predict_player(9, StatePair(states[1], states[2]), spec, spec.i_y)


def _ball_pair(states, before, last):
    return StatePair(replace(states[1], ball=before), replace(states[2], ball=last))


def test_ball_two_axes_rejected(walk):
    spec, states = walk
    pair = _ball_pair(states, BallState(x=1, y=4, z=9), BallState(x=1.1, y=4, z=8.9))
    with pytest.raises(SingleAxisViolation):
        predict_ball(pair, spec, spec.i_y, 0)


def test_ball_guard_inclusive_extrapolates(walk):
    spec, states = walk
    pair = _ball_pair(states, BallState(x=1, y=4, z=9), BallState(x=1.1, y=4, z=9))
    x, y, z = predict_ball(pair, spec, spec.i_y, 1)
    assert x == pytest.approx(1.2)
    assert y == pytest.approx(4 + spec.i_y)
    assert z == 9


def test_ball_guard_strict_holds_on_exact_step(walk):
    spec, states = walk
    pair = _ball_pair(states, BallState(x=1, y=4, z=9), BallState(x=1.1, y=4, z=9))
    assert predict_ball(pair, spec, spec.i_y, 1, ball_guard='strict') == (1.1, 4, 9)


def test_ball_clamped_to_field_and_ceiling(walk):
    spec, states = walk
    pair = _ball_pair(states, BallState(x=1, y=8, z=9.95), BallState(x=1, y=8, z=10))
    x, y, z = predict_ball(pair, spec, spec.i_y, 2)
    assert z == spec.z_max
    assert y == spec.player_height + 2 * spec.i_y


def test_ball_unknown_guard(walk):
    spec, states = walk
    with pytest.raises(ValueError):
        predict_ball(StatePair(states[1], states[2]), spec, spec.i_y, 0, ball_guard='loose')


@pytest.mark.parametrize("tau, delta, expected", [
    (0, 1, 1),
    (2, 1, 2),
    (0, -1, 0),
    (1, 0, 1),
])
def test_update_tau(tau, delta, expected):
    assert update_tau(tau, delta) == expected


def test_update_tau_rejects():
    with pytest.raises(ValueError):
        update_tau(0, 2)


def test_dr_baseline_linear(walk):
    spec, states = walk
    predicted = dr_baseline(StatePair(states[3], states[4]), spec.tick_period, spec)
    for p, truth in zip(predicted.players, states[5].players):
        assert p.x == pytest.approx(truth.x)
        assert p.z == pytest.approx(truth.z)


def test_frozen_players_copied_verbatim():
    spec, states = _lossless(replace(ORACLE, mu=1))
    assert all(p.frozen for p in states[2].players)
    predicted = predict_state(StatePair(states[1], states[2]), spec)
    assert predicted.players == states[2].players


def test_frozen_flag_blocks_extrapolation(walk):
    spec, states = walk
    last = _with_player(states[2], 3, frozen=True)
    predicted = predict_state(StatePair(states[1], last), spec)
    assert predicted.player(3).pos == states[2].player(3).pos
    assert predicted.player(3).pos != states[3].player(3).pos
    assert predicted.player(1).pos == states[3].player(1).pos
