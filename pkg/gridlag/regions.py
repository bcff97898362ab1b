"""Regions

This module manages the More Detailed Region (MDR) around the ball and the
Less Detailed Region (LDR) everywhere else. Players in the LDR are frozen.
"""

import enum
import logging
from dataclasses import dataclass, replace

from gridlag.kinematics import TOLERANCE, clamp

log = logging.getLogger(__name__)

DEFAULT_MU = 1


class RegionKind(enum.Enum):
    MDR = 'MDR'
    LDR = 'LDR'


@dataclass(frozen=True)
class Region:
    """An MDR anchored at the ball (alpha, beta) with game region constant mu.

    corners are ordered (x_lo, z_lo), (x_lo, z_hi), (x_hi, z_lo), (x_hi, z_hi).
    """

    anchor: tuple
    mu: int
    interval: float
    corners: tuple
    bounds: tuple

    @property
    def x_range(self):
        return (self.corners[0][0], self.corners[3][0])

    @property
    def z_range(self):
        return (self.corners[0][1], self.corners[3][1])

    def contains(self, point):
        """Closed-rectangle membership: the boundary counts as MDR."""
        x, z = point
        x_lo, x_hi = self.x_range
        z_lo, z_hi = self.z_range
        return (x_lo - TOLERANCE <= x <= x_hi + TOLERANCE and
                z_lo - TOLERANCE <= z <= z_hi + TOLERANCE)


def compute_mdr(ball, mu, interval, bounds):
    """Compute the clamped MDR around the ball.

    Args:
        ball (tuple): (alpha, beta) ball ground coordinates
        mu (int): game region constant, >= 1
        interval (float): background partitioning point interval I
        bounds (tuple): (x_max, z_max)

    Returns:
        Region whose corners are (alpha +- mu*I, beta +- mu*I) with every
        coordinate clamped into [0, bound]

    Raises:
        ValueError if the ball lies outside the field or mu < 1
    """
    if mu < 1:
        raise ValueError('game region constant mu must be >= 1, got {}'.format(mu))
    if interval <= 0:
        raise ValueError('interval must be positive')

    alpha, beta = ball
    x_max, z_max = bounds
    if not (-TOLERANCE <= alpha <= x_max + TOLERANCE and
            -TOLERANCE <= beta <= z_max + TOLERANCE):
        raise ValueError('ball ({}, {}) outside field bounds {}'.format(alpha, beta, bounds))

    reach = mu * interval
    x_lo = clamp(alpha - reach, 0.0, x_max)
    x_hi = clamp(alpha + reach, 0.0, x_max)
    z_lo = clamp(beta - reach, 0.0, z_max)
    z_hi = clamp(beta + reach, 0.0, z_max)

    return Region(anchor=(alpha, beta), mu=mu, interval=interval,
                  corners=((x_lo, z_lo), (x_lo, z_hi), (x_hi, z_lo), (x_hi, z_hi)),
                  bounds=(x_max, z_max))


def classify(entity_pos, region):
    """Return RegionKind.MDR if the (x, z) position lies in the region."""
    if region.contains(entity_pos):
        return RegionKind.MDR
    return RegionKind.LDR


def update_mdr(region, ball, interval, bounds):
    """Keep the current MDR while the ball is inside it, else assign a new one.

    A change of interval always triggers a fresh region.
    """
    if (region is not None and region.interval == interval and
            region.bounds == tuple(bounds) and region.contains(ball)):
        return region

    new_region = compute_mdr(ball, region.mu if region else DEFAULT_MU, interval, bounds)
    if region is not None and region.interval == interval:
        log.debug('ball left MDR at %s, new MDR anchored at %s',
                  region.anchor, new_region.anchor)
    return new_region


def apply_freeze(state, region):
    """Freeze every LDR player and unfreeze every MDR player.

    Returns:
        a copy of the state carrying the region as its MDR
    """
    players = []
    for p in state.players:
        frozen = classify(p.ground, region) is RegionKind.LDR
        players.append(p if p.frozen == frozen else replace(p, frozen=frozen))

    return replace(state, players=tuple(players), mdr=region)


def unfrozen_count(state):
    """Number of fully simulated (MDR) players, the memory proxy."""
    return sum(1 for p in state.players if not p.frozen)
