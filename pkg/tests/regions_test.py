import pytest
from dataclasses import replace

from gridlag.game import GameState
from gridlag.kinematics import BallState, PlayerState
from gridlag.regions import *

FIELD = (5, 5)


def test_compute_mdr_layout():
    region = compute_mdr((2, 3), 1, 1, FIELD)
    assert set(region.corners) == {(1, 2), (1, 4), (3, 2), (3, 4)}
    assert region.anchor == (2, 3)


@pytest.mark.parametrize("ball, mu, expected", [
    ((0, 0), 1, {(0, 0), (0, 1), (1, 0), (1, 1)}),
    ((5, 5), 2, {(3, 3), (3, 5), (5, 3), (5, 5)}),
    ((2, 3), 10, {(0, 0), (0, 5), (5, 0), (5, 5)}),
])
def test_compute_mdr_clamps(ball, mu, expected):
    region = compute_mdr(ball, mu, 1, FIELD)
    assert set(region.corners) == expected
    assert region.contains(ball)


@pytest.mark.parametrize("ball, mu", [
    ((6, 3), 1),
    ((2, -1), 1),
    ((2, 3), 0),
])
def test_compute_mdr_rejects(ball, mu):
    with pytest.raises(ValueError):
        compute_mdr(ball, mu, 1, FIELD)


@pytest.mark.parametrize("point, expected", [
    ((2, 3), RegionKind.MDR),
    ((3, 4), RegionKind.MDR),
    ((1, 2), RegionKind.MDR),
    ((3.5, 3), RegionKind.LDR),
    ((0, 0), RegionKind.LDR),
])
def test_classify_boundary_is_mdr(point, expected):
    region = compute_mdr((2, 3), 1, 1, FIELD)
    assert classify(point, region) is expected


def test_update_mdr_keeps_region_while_ball_inside():
    region = compute_mdr((2, 3), 1, 1, FIELD)
    assert update_mdr(region, (3, 3), 1, FIELD) is region


def test_update_mdr_moves_with_ball():
    region = compute_mdr((2, 3), 1, 1, FIELD)
    moved = update_mdr(region, (4, 3), 1, FIELD)
    assert moved.anchor == (4, 3)
    assert moved.mu == region.mu


def test_update_mdr_new_interval():
    region = compute_mdr((2, 3), 1, 1, FIELD)
    assert update_mdr(region, (2, 3), 0.5, FIELD).interval == 0.5


def _state(region):
    players = (PlayerState(id=1, x=2, y=4, z=3, height=4),
               PlayerState(id=2, x=5, y=4, z=5, height=4, frozen=False),
               PlayerState(id=3, x=3, y=4, z=2, height=4, frozen=True))
    return GameState(index=0, time=0.0, interval=1, players=players,
                     ball=BallState(x=2, y=4, z=3), mdr=region)


def test_apply_freeze():
    region = compute_mdr((2, 3), 1, 1, FIELD)
    state = apply_freeze(_state(region), region)

    assert [p.frozen for p in state.players] == [False, True, False]
    assert unfrozen_count(state) == 2
    assert state.mdr is region


def test_apply_freeze_ignores_history():
    region = compute_mdr((2, 3), 1, 1, FIELD)
    once = apply_freeze(_state(region), region)
    assert apply_freeze(once, region) == once


def test_mdr_transfer_unfreezes_players():
    region = compute_mdr((2, 3), 1, 1, FIELD)
    players = (PlayerState(id=1, x=2, y=4, z=3, height=4),
               PlayerState(id=2, x=4, y=4, z=3, height=4))
    state = apply_freeze(GameState(index=0, time=0.0, interval=1, players=players,
                                   ball=BallState(x=2, y=4, z=3), mdr=region), region)
    assert [p.frozen for p in state.players] == [False, True]

    moved = update_mdr(region, (4, 3), 1, FIELD)
    assert moved is not region
    state = apply_freeze(replace(state, ball=BallState(x=4, y=4, z=3)), moved)
    assert [p.frozen for p in state.players] == [True, False]
    assert state.mdr is moved
