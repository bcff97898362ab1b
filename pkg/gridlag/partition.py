"""Partition

This module provides the adaptive background partitioning: the partitioning
parameter rho = theta*G/L, the point interval I, the coordinate lattice and
re-partitioning of a game state when rho changes.
"""

import math
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from gridlag.kinematics import TOLERANCE, GameKind, compute_iy
from gridlag.regions import apply_freeze, compute_mdr

log = logging.getLogger(__name__)

DEFAULT_THETA = 100.0
DEFAULT_GAME_LEVEL = 1
DEFAULT_LATENCY_MS = 100.0
DEFAULT_SCREEN_WIDTH = 10.0
DEFAULT_MIN_POINTS = 10
DEFAULT_Y_MAX = 10.0
DEFAULT_PLAYER_HEIGHT = 4.0
DEFAULT_TICK_PERIOD = 0.1  # seconds

# re-partition only when I moves by more than this fraction
REPARTITION_THRESHOLD = 0.01


def _require_positive(**values):
    for name, value in values.items():
        if value is None or value <= 0:
            raise ValueError('{} must be strictly positive, got {}'.format(name, value))


def compute_rho(theta, game_level, latency_rate):
    """Return the partitioning parameter rho = theta * G / L.

    Raises:
        ValueError on a non-positive input
    """
    _require_positive(theta=theta, game_level=game_level, latency_rate=latency_rate)
    return theta * game_level / latency_rate


def compute_interval(rho, screen_width, min_points):
    """Return the background partitioning point interval I.

    There should be at least R points on each axis, so:
        rho <= w_s/R            -> I = rho
        w_s/R < rho <= 2*w_s/R  -> I = rho/2
        rho > 2*w_s/R           -> I = w_s/R
    Ties go to the first matching branch.
    """
    _require_positive(rho=rho, screen_width=screen_width, min_points=min_points)

    limit = screen_width / min_points
    if rho <= limit:
        return rho
    if rho <= 2 * limit:
        return rho / 2.0
    return limit


def needs_repartition(old_interval, new_interval, threshold=REPARTITION_THRESHOLD):
    """True when the interval moved by more than the hysteresis threshold."""
    return abs(new_interval - old_interval) > threshold * old_interval


def lattice_count(interval, bound):
    """Index of the largest lattice point that does not exceed the bound."""
    return int(math.floor(bound / interval + TOLERANCE))


def snap(value, interval, bound):
    """Snap a coordinate to the nearest lattice point in [0, bound].

    Exact ties between two points go towards 0.
    """
    index = math.ceil(value / interval - 0.5)
    index = min(max(index, 0), lattice_count(interval, bound))
    return index * interval


def is_lattice_member(value, interval):
    steps = value / interval
    return abs(steps - round(steps)) <= 1e-6


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice points 0, I, 2I, ... <= w_s shared by the x and z axes."""

    points_x: np.ndarray
    points_z: np.ndarray
    interval: float

    @property
    def interior_count(self):
        """Interior points 1..n between the boundary points."""
        return max(len(self.points_x) - 2, 0)

    def contains(self, value):
        return bool(np.any(np.abs(self.points_x - value) <= TOLERANCE))


def build_lattice(interval, screen_width):
    """Build the coordinate lattice x_{n+1} = x_n + I <= w_s.

    Raises:
        ValueError if the interval is not in (0, screen_width]
    """
    _require_positive(interval=interval, screen_width=screen_width)
    if interval > screen_width + TOLERANCE:
        raise ValueError('interval {} exceeds screen width {}'.format(interval, screen_width))

    points = np.arange(lattice_count(interval, screen_width) + 1) * interval
    return Lattice(points_x=points, points_z=points.copy(), interval=interval)


@dataclass(frozen=True)
class GridSpec:
    """The partitioning state: theta, G, L, rho, w_s, R, I and the axis bounds.

    The playing field extent equals the screen width on both x and z.
    """

    theta: float
    game_level: int
    latency_rate: float
    rho: float
    screen_width: float
    min_points: int
    interval: float
    x_max: float
    z_max: float
    y_max: float
    player_height: float = DEFAULT_PLAYER_HEIGHT
    game_kind: GameKind = GameKind.FOOTBALL
    tick_period: float = DEFAULT_TICK_PERIOD
    i_y: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'game_kind', GameKind(self.game_kind))
        object.__setattr__(self, 'i_y', compute_iy(self.y_max, self.player_height))
        _require_positive(tick_period=self.tick_period)

    @classmethod
    def create(cls, theta=DEFAULT_THETA, game_level=DEFAULT_GAME_LEVEL,
               latency_rate=DEFAULT_LATENCY_MS, screen_width=DEFAULT_SCREEN_WIDTH,
               min_points=DEFAULT_MIN_POINTS, y_max=DEFAULT_Y_MAX,
               player_height=DEFAULT_PLAYER_HEIGHT, game_kind=GameKind.FOOTBALL,
               tick_period=DEFAULT_TICK_PERIOD):
        """Derive rho and I from the raw parameters."""
        rho = compute_rho(theta, game_level, latency_rate)
        return cls(theta=theta, game_level=game_level, latency_rate=latency_rate,
                   rho=rho, screen_width=screen_width, min_points=min_points,
                   interval=compute_interval(rho, screen_width, min_points),
                   x_max=screen_width, z_max=screen_width, y_max=y_max,
                   player_height=player_height, game_kind=game_kind,
                   tick_period=tick_period)

    @property
    def bounds(self):
        return (self.x_max, self.z_max)

    @property
    def lattice(self):
        return build_lattice(self.interval, self.screen_width)

    def with_latency(self, latency_rate):
        rho = compute_rho(self.theta, self.game_level, latency_rate)
        return replace(self, latency_rate=latency_rate, rho=rho,
                       interval=compute_interval(rho, self.screen_width, self.min_points))

    def with_rho(self, rho):
        _require_positive(rho=rho)
        return replace(self, rho=rho, latency_rate=self.theta * self.game_level / rho,
                       interval=compute_interval(rho, self.screen_width, self.min_points))


def resnap(state, interval, spec):
    """Snap every player and the ball onto the lattice of the given interval.

    The MDR is recomputed around the snapped ball and freeze flags reapplied;
    state index and time are untouched.
    """
    x_max, z_max = spec.bounds
    players = tuple(replace(p, x=snap(p.x, interval, x_max), z=snap(p.z, interval, z_max))
                    for p in state.players)
    ball = replace(state.ball, x=snap(state.ball.x, interval, x_max),
                   z=snap(state.ball.z, interval, z_max))

    region = compute_mdr(ball.ground, state.mdr.mu, interval, spec.bounds)
    return apply_freeze(replace(state, interval=interval, players=players, ball=ball), region)


def repartition(state, new_rho, spec):
    """Re-partition the background after rho changed.

    Returns:
        the state snapped onto the lattice derived from new_rho, or the same
        state object when the interval does not change
    """
    new_interval = compute_interval(new_rho, spec.screen_width, spec.min_points)
    if new_interval == state.interval:
        return state

    log.debug('re-partition at state %s: I %s -> %s', state.index, state.interval, new_interval)
    return resnap(state, new_interval, spec)
