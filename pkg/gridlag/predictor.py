"""Predictor

This module reconstructs a missing game state S_n from the two previous
committed states S_{n-1} and S_{n-2}. It never stores velocities: every
prediction is read off two lattice positions per entity.

A dead-reckoning baseline is included for comparison runs only.
"""

import logging
from dataclasses import dataclass, replace

from gridlag.game import settle
from gridlag.kinematics import MAX_TAU, TOLERANCE, clamp, clamp_tau
from gridlag.partition import resnap

log = logging.getLogger(__name__)

BALL_GUARD_STRICT = 'strict'
BALL_GUARD_INCLUSIVE = 'inclusive'
BALL_GUARDS = (BALL_GUARD_STRICT, BALL_GUARD_INCLUSIVE)

# relative slack when comparing a displacement against one interval
STEP_SLACK = 1e-6


class MissingEntityError(KeyError):
    """A player is absent from one of the two states of a pair."""


class SingleAxisViolation(RuntimeError):
    """The ball moved along x and z between two states."""


class NotEnoughHistory(RuntimeError):
    """Prediction needs two committed states."""


@dataclass(frozen=True)
class StatePair:
    """S_{n-2} and S_{n-1}, on the same lattice, in time order."""

    prev2: object
    prev1: object

    def __post_init__(self):
        if not self.prev1.time > self.prev2.time >= 0:
            raise ValueError('state times must increase: {} then {}'.format(
                self.prev2.time, self.prev1.time))
        if self.prev1.interval != self.prev2.interval:
            raise ValueError('states of a pair must share one interval')

    @property
    def interval(self):
        """I_{n-1}, inherited by the predicted state."""
        return self.prev1.interval


def make_pair(prev2, prev1, spec):
    """Build a pair, snapping S_{n-2} onto S_{n-1}'s lattice if it changed."""
    if prev2.interval != prev1.interval:
        prev2 = resnap(prev2, prev1.interval, spec)
    return StatePair(prev2=prev2, prev1=prev1)


def pair_from_history(history, spec):
    """Pair the last two committed states of a history list.

    Raises:
        NotEnoughHistory with fewer than two committed states
    """
    if len(history) < 2:
        raise NotEnoughHistory('prediction needs two committed states, have {}'.format(
            len(history)))
    return make_pair(history[-2], history[-1], spec)


def _reaches(delta, step):
    return abs(delta) >= step * (1 - STEP_SLACK)


def _sign(delta):
    return 1 if delta > 0 else -1


def update_tau(tau, delta):
    """Shift the kick strength tau by delta, clamped to [0, 2]."""
    if not 0 <= tau <= MAX_TAU:
        raise ValueError('tau must lie in [0, {}]'.format(MAX_TAU))
    if delta not in (-1, 0, 1):
        raise ValueError('tau delta must be -1, 0 or +1')
    return clamp_tau(tau + delta)


def predict_player(k, pair, spec, i_y):
    """Predict player k's (x, y, z) in S_n.

    Branches, in order:
        motionless       -> hold S_{n-1}
        moved along x    -> one more signed step, clamped to [0, X_max - I]
        moved along z    -> one more signed step, clamped to [0, Z_max - I]
        jumped           -> come down to S_{n-2}'s y
        anything else    -> retain S_{n-1}

    Raises:
        MissingEntityError if player k is not in both states
    """
    try:
        before = pair.prev2.player(k)
        last = pair.prev1.player(k)
    except KeyError:
        raise MissingEntityError(k)

    interval = pair.interval
    dx = last.x - before.x
    dy = last.y - before.y
    dz = last.z - before.z
    moved_x = _reaches(dx, interval)
    moved_z = _reaches(dz, interval)
    level_y = not _reaches(dy, i_y)

    if not moved_x and level_y and not moved_z:
        return last.pos
    if moved_x and level_y and not moved_z:
        x = clamp(last.x + _sign(dx) * interval, 0.0, spec.x_max - interval)
        return (x, last.y, last.z)
    if not moved_x and level_y and moved_z:
        z = clamp(last.z + _sign(dz) * interval, 0.0, spec.z_max - interval)
        return (last.x, last.y, z)
    if not moved_x and not moved_z and dy >= i_y * (1 - STEP_SLACK):
        return (last.x, before.y, last.z)

    return last.pos


def predict_ball(pair, spec, i_y, tau, ball_guard=BALL_GUARD_INCLUSIVE):
    """Predict the ball's (x, y, z) in S_n.

    The ball is held when nothing changed. When exactly one horizontal axis
    changed and the guard accepts the displacement, it steps one more signed
    I along that axis, clamped to [0, bound], and y becomes
    Y_{b-1} + tau*I_y clamped to [0, Y_max] and to the ball ceiling.

    The verbatim guard is strict (|delta| < I); inclusive accepts
    0 < |delta| <= I so that exact lattice motion is extrapolated.

    Raises:
        SingleAxisViolation if both x and z changed
    """
    if ball_guard not in BALL_GUARDS:
        raise ValueError('unknown ball guard "{}"'.format(ball_guard))

    before = pair.prev2.ball
    last = pair.prev1.ball
    interval = pair.interval
    dx = last.x - before.x
    dz = last.z - before.z
    moved_x = abs(dx) > TOLERANCE
    moved_z = abs(dz) > TOLERANCE

    if moved_x and moved_z:
        raise SingleAxisViolation('ball moved along x and z between states {} and {}'.format(
            pair.prev2.index, pair.prev1.index))
    if not moved_x and not moved_z and abs(last.y - before.y) <= TOLERANCE:
        return last.pos

    if ball_guard == BALL_GUARD_STRICT:
        guard = lambda delta: abs(delta) < interval * (1 - STEP_SLACK)
    else:
        guard = lambda delta: abs(delta) <= interval * (1 + STEP_SLACK)

    ceiling = min(spec.y_max, spec.player_height + 2 * i_y)
    y = min(clamp(last.y + tau * i_y, 0.0, spec.y_max), ceiling)

    if moved_x and guard(dx):
        return (clamp(last.x + _sign(dx) * interval, 0.0, spec.x_max), y, last.z)
    if moved_z and guard(dz):
        return (last.x, y, clamp(last.z + _sign(dz) * interval, 0.0, spec.z_max))

    return last.pos


def predict_state(pair, spec, tau=None, ball_guard=BALL_GUARD_INCLUSIVE):
    """Assemble the predicted S_n = {I_{n-1}, P^k_n, B_n}.

    Frozen players are copied verbatim. Tau defaults to the value carried on
    S_{n-1}'s ball, i.e. the strength of the last applied kick.

    Returns:
        GameState with index and time advanced by one server tick
    """
    last = pair.prev1
    if tau is None:
        tau = last.ball.tau

    players = []
    for player in last.players:
        if player.frozen:
            players.append(player)
            continue
        x, y, z = predict_player(player.id, pair, spec, spec.i_y)
        players.append(replace(player, x=x, y=y, z=z))

    bx, by, bz = predict_ball(pair, spec, spec.i_y, tau, ball_guard=ball_guard)
    ball = replace(last.ball, x=bx, y=by, z=bz)

    predicted = replace(last, index=last.index + 1, time=last.time + spec.tick_period,
                        players=tuple(players), ball=ball)
    return settle(predicted, spec)


def predict_ahead(pair, spec, steps, ball_guard=BALL_GUARD_INCLUSIVE):
    """Bridge a gap of several missing states by iterating predict_state."""
    states = []
    for _ in range(steps):
        predicted = predict_state(pair, spec, ball_guard=ball_guard)
        states.append(predicted)
        pair = StatePair(prev2=pair.prev1, prev1=predicted)
    return states


def dr_baseline(pair, dt, spec):
    """Dead-reckoning comparison: linear extrapolation pos + velocity*dt.

    Output is clamped to the field but not snapped to the lattice.
    """
    elapsed = pair.prev1.time - pair.prev2.time

    def extrapolate(before, last):
        out = []
        for b, l, high in zip(before, last, (spec.x_max, spec.y_max, spec.z_max)):
            velocity = (l - b) / elapsed
            out.append(clamp(l + velocity * dt, 0.0, high))
        return out

    players = []
    for player in pair.prev1.players:
        if player.frozen:
            players.append(player)
            continue
        try:
            before = pair.prev2.player(player.id)
        except KeyError:
            raise MissingEntityError(player.id)
        x, y, z = extrapolate(before.pos, player.pos)
        players.append(replace(player, x=x, y=max(y, player.height), z=z))

    bx, by, bz = extrapolate(pair.prev2.ball.pos, pair.prev1.ball.pos)
    ball = replace(pair.prev1.ball, x=bx, y=by, z=bz)

    last = pair.prev1
    predicted = replace(last, index=last.index + 1, time=last.time + dt,
                        players=tuple(players), ball=ball)
    return settle(predicted, spec)
