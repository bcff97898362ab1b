"""Kinematics

This module provides legal-move generation for players and the ball on the
partitioned game background, including talent multipliers and the y-axis
height ladder.
"""

import enum
import logging
from dataclasses import dataclass, replace

log = logging.getLogger(__name__)

# Float comparisons on lattice coordinates
TOLERANCE = 1e-9

X_AXIS = 'x'
Z_AXIS = 'z'
AXES = (X_AXIS, Z_AXIS)

# Talent multipliers (phi)
ORDINARY = 1
SPECIAL = 2
WORLD_CLASS = 3
TALENTS = (ORDINARY, SPECIAL, WORLD_CLASS)

MAX_TAU = 2


class GameKind(enum.Enum):
    FOOTBALL = 'football'
    HOCKEY = 'hockey'
    BASKETBALL = 'basketball'

    @property
    def jump_levels(self):
        """Number of I_y steps a player may rise above the ground."""
        return 2 if self is GameKind.BASKETBALL else 1


@dataclass(frozen=True)
class PlayerState:
    """One player P^k: id, (x, y, z) in screen units, talent and flags."""

    id: int
    x: float
    y: float
    z: float
    height: float
    phi: int = ORDINARY
    has_ball: bool = False
    frozen: bool = False

    def __post_init__(self):
        if self.id < 1:
            raise ValueError('player id must be positive, got {}'.format(self.id))
        if self.phi not in TALENTS:
            raise ValueError('unknown talent multiplier {}'.format(self.phi))
        if self.height <= 0:
            raise ValueError('player height must be positive')

    @property
    def pos(self):
        return (self.x, self.y, self.z)

    @property
    def ground(self):
        return (self.x, self.z)

    @property
    def is_special(self):
        return self.phi > ORDINARY

    @property
    def airborne(self):
        return self.y > self.height + TOLERANCE


@dataclass(frozen=True)
class BallState:
    """The ball B_n with kick strength tau and optional holder id."""

    x: float
    y: float
    z: float
    tau: int = 0
    holder: int = None

    def __post_init__(self):
        if not 0 <= self.tau <= MAX_TAU:
            raise ValueError('tau must lie in [0, {}], got {}'.format(MAX_TAU, self.tau))

    @property
    def pos(self):
        return (self.x, self.y, self.z)

    @property
    def ground(self):
        return (self.x, self.z)


def compute_iy(y_max, player_height):
    """Return the y-axis point interval I_y = (Y_max - Height_player) / 3.

    Raises:
        ValueError if y_max does not exceed the player height
    """
    if player_height <= 0:
        raise ValueError('player height must be positive')
    if y_max <= player_height:
        raise ValueError('y_max ({}) must exceed player height ({})'.format(
            y_max, player_height))

    return (y_max - player_height) / 3.0


def clamp(value, low, high):
    return min(max(value, low), high)


def clamp_tau(tau):
    return int(clamp(tau, 0, MAX_TAU))


def step_length(player, interval):
    """A special player carrying the ball strides phi*I; everyone else strides I."""
    if player.is_special and player.has_ball:
        return player.phi * interval
    return interval


def move_target(player, axis, direction, interval):
    """Return the (x, z) a move command points at, before legality checks."""
    if axis not in AXES:
        raise ValueError('unknown axis "{}"'.format(axis))
    if direction not in (-1, 1):
        raise ValueError('direction must be -1 or +1')

    delta = direction * step_length(player, interval)
    if axis == X_AXIS:
        return (player.x + delta, player.z)
    return (player.x, player.z + delta)


def in_bounds(point, bounds):
    x, z = point
    x_max, z_max = bounds
    return -TOLERANCE <= x <= x_max + TOLERANCE and -TOLERANCE <= z <= z_max + TOLERANCE


def player_move_candidates(player, interval, bounds):
    """Return every (x, z) the player may occupy next.

    The set holds the current point plus the four cardinal neighbours one
    stride away. Candidates outside [0, bound] on either axis are pruned.

    Args:
        player (PlayerState): an unfrozen player
        interval (float): background partitioning point interval I
        bounds (tuple): (x_max, z_max)

    Returns:
        frozenset of (x, z) tuples
    """
    candidates = {player.ground}
    for axis in AXES:
        for direction in (-1, 1):
            candidates.add(move_target(player, axis, direction, interval))

    return frozenset(c for c in candidates if in_bounds(c, bounds))


def jump_targets(player, i_y, game_kind):
    """Return the legal next y values for a player.

    On the ground a player may stay or rise up to the game kind's jump cap.
    An airborne player can only descend one I_y step towards its height.
    """
    game_kind = GameKind(game_kind)
    if player.airborne:
        return frozenset([max(player.height, player.y - i_y)])

    return frozenset(player.height + level * i_y
                     for level in range(game_kind.jump_levels + 1))


def ball_move(ball, axis, direction, tau_delta, interval, i_y, bounds,
              height, y_max, phi=ORDINARY):
    """Move the ball one stride along a single horizontal axis.

    The stride is phi*I when struck by a special holder. Tau is shifted by
    tau_delta and clamped to [0, 2]; the ball's y becomes height + tau*I_y
    clamped to [0, y_max]. A tau_delta of 0 keeps y as it is.

    Returns:
        the moved BallState, or the unchanged ball when the horizontal target
        falls outside the field
    """
    if axis not in AXES:
        raise ValueError('unknown axis "{}"'.format(axis))
    if direction not in (-1, 1):
        raise ValueError('direction must be -1 or +1')
    if tau_delta not in (-1, 0, 1):
        raise ValueError('tau_delta must be -1, 0 or +1')

    delta = direction * phi * interval
    x, z = ball.x, ball.z
    if axis == X_AXIS:
        x += delta
    else:
        z += delta

    if not in_bounds((x, z), bounds):
        log.debug('ball move to (%s, %s) rejected: outside field', x, z)
        return ball

    tau = clamp_tau(ball.tau + tau_delta)
    y = ball.y if tau_delta == 0 else clamp(height + tau * i_y, 0.0, y_max)

    return replace(ball, x=x, y=y, z=z, tau=tau)
