"""Game

This module holds the deterministic simultaneous-movement soccer-like game:
the game state S_n, the default kickoff setup S_0, input events, the committed
step function and a canonical binary snapshot codec used for replay hashes.
"""

import enum
import hashlib
import logging
from dataclasses import dataclass, replace

import numpy as np

from gridlag.kinematics import (TOLERANCE, ORDINARY, BallState, PlayerState,
                                ball_move, jump_targets, move_target,
                                player_move_candidates)
from gridlag.partition import is_lattice_member, snap
from gridlag.regions import Region, RegionKind, apply_freeze, classify, compute_mdr, update_mdr
from gridlag.scenarios import ConfigError

log = logging.getLogger(__name__)


class CommandKind(enum.Enum):
    MOVE = 'move'
    JUMP = 'jump'
    KICK = 'kick'
    IDLE = 'idle'


@dataclass(frozen=True)
class Command:
    kind: CommandKind
    axis: str = None
    direction: int = 0
    tau_delta: int = 0
    levels: int = 1


IDLE = Command(CommandKind.IDLE)


@dataclass(frozen=True)
class InputEvent:
    """A game control key pressed by the player owning player_id."""

    player_id: int
    command: Command = IDLE
    issued_at: float = 0.0

    @classmethod
    def move(cls, player_id, axis, direction, issued_at=0.0):
        return cls(player_id, Command(CommandKind.MOVE, axis=axis, direction=direction), issued_at)

    @classmethod
    def jump(cls, player_id, levels=1, issued_at=0.0):
        return cls(player_id, Command(CommandKind.JUMP, levels=levels), issued_at)

    @classmethod
    def kick(cls, player_id, axis, direction, tau_delta=0, issued_at=0.0):
        return cls(player_id, Command(CommandKind.KICK, axis=axis, direction=direction,
                                      tau_delta=tau_delta), issued_at)

    @classmethod
    def idle(cls, player_id, issued_at=0.0):
        return cls(player_id, IDLE, issued_at)


@dataclass(frozen=True)
class GameState:
    """One committed game state S_n = {I_{n-1}, P^k_n, B_n} plus its MDR."""

    index: int
    time: float
    interval: float
    players: tuple
    ball: BallState
    mdr: Region
    rng_cursor: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'players', tuple(sorted(self.players, key=lambda p: p.id)))
        ids = [p.id for p in self.players]
        if len(set(ids)) != len(ids):
            raise ValueError('duplicate player ids in state {}'.format(self.index))
        if len(set(p.height for p in self.players)) > 1:
            raise ValueError('all players must share one height')

    def player(self, player_id):
        for p in self.players:
            if p.id == player_id:
                return p
        raise KeyError(player_id)

    @property
    def player_ids(self):
        return tuple(p.id for p in self.players)

    @property
    def holder(self):
        if self.ball.holder is None:
            return None
        return self.player(self.ball.holder)


def _same_point(a, b):
    return abs(a[0] - b[0]) <= TOLERANCE and abs(a[1] - b[1]) <= TOLERANCE


def kickoff_formation(team_size, interval, screen_width):
    """Mirrored halves: one column per side at a quarter of the field."""
    x_home = snap(screen_width / 4.0, interval, screen_width)
    x_away = snap(screen_width - x_home, interval, screen_width)

    points = []
    for x in (x_home, x_away):
        for slot in range(team_size):
            z = screen_width * (slot + 1) / (team_size + 1)
            points.append((x, snap(z, interval, screen_width)))
    return points


def default_state(config):
    """Build S_0: kickoff formation, ball in the centre, MDR around the ball.

    Args:
        config (ScenarioConfig): the scenario definition

    Raises:
        ConfigError if the configuration cannot produce a valid state
    """
    if config.min_points < 2:
        raise ConfigError('grid.min_points must be >= 2, got {}'.format(config.min_points))
    if config.mu < 1:
        raise ConfigError('grid.mu must be >= 1, got {}'.format(config.mu))

    spec = config.grid_spec()
    interval = spec.interval
    width = spec.screen_width
    height = spec.player_height

    if config.formation:
        points = [(snap(x, interval, width), snap(z, interval, width)) for x, z in config.formation]
    else:
        points = kickoff_formation(config.team_size, interval, width)

    players = [PlayerState(id=k, x=x, y=height, z=z, height=height,
                           phi=config.special.get(k, ORDINARY))
               for k, (x, z) in enumerate(points, start=1)]

    if config.ball_start:
        bx, bz = config.ball_start
    else:
        bx, bz = width / 2.0, width / 2.0
    ball = BallState(x=snap(bx, interval, width), y=height, z=snap(bz, interval, width))

    region = compute_mdr(ball.ground, config.mu, interval, spec.bounds)
    state = GameState(index=0, time=0.0, interval=interval, players=tuple(players),
                      ball=ball, mdr=region)
    return settle(state, spec)


def settle(state, spec):
    """Resolve possession, the MDR transfer and freeze flags after movement.

    A held ball follows its holder. The ball then goes to the lowest-id player
    standing on its point, the current holder included; a change of holder
    resets tau and drops the ball to the player height.
    """
    ball = state.ball
    holder = None
    if ball.holder is not None:
        holder = next((p for p in state.players if p.id == ball.holder), None)
    if holder is not None and not _same_point(holder.ground, ball.ground):
        ball = replace(ball, x=holder.x, z=holder.z)

    takers = [p.id for p in state.players if _same_point(p.ground, ball.ground)]
    if takers:
        if min(takers) != ball.holder:
            log.debug('ball taken by player %s from %s', min(takers), ball.holder)
            ball = replace(ball, holder=min(takers), tau=0, y=spec.player_height)
    elif ball.holder is not None:
        ball = replace(ball, holder=None)

    players = tuple(p if p.has_ball == (p.id == ball.holder) else
                    replace(p, has_ball=(p.id == ball.holder))
                    for p in state.players)

    region = update_mdr(state.mdr, ball.ground, state.interval, spec.bounds)
    return apply_freeze(replace(state, players=players, ball=ball), region)


def _index_events(state, inputs):
    known = set(state.player_ids)
    events = {}
    for event in inputs:
        if event.player_id not in known:
            log.warning('rejected input event from unknown player %s', event.player_id)
            continue
        if event.player_id in events:
            log.debug('duplicate input for player %s in tick %s ignored',
                      event.player_id, state.index + 1)
            continue
        events[event.player_id] = event
    return events


def step(state, inputs, spec):
    """Advance S_n to S_{n+1} with at most one input event per player.

    Players act in ascending id order, the ball last. Frozen players ignore
    their inputs; airborne players must come down one I_y step; a command
    whose target is not a legal candidate is ignored.
    """
    events = _index_events(state, inputs)
    interval = state.interval
    players = []
    kick = None

    for player in state.players:
        if player.frozen:
            players.append(player)
            continue
        if player.airborne:
            y = min(jump_targets(player, spec.i_y, spec.game_kind))
            players.append(replace(player, y=y))
            continue

        command = events[player.id].command if player.id in events else IDLE
        if command.kind is CommandKind.MOVE:
            target = move_target(player, command.axis, command.direction, interval)
            if target in player_move_candidates(player, interval, spec.bounds):
                player = replace(player, x=target[0], z=target[1])
            else:
                log.debug('player %s move to %s rejected', player.id, target)
        elif command.kind is CommandKind.JUMP:
            y = player.height + command.levels * spec.i_y
            if y in jump_targets(player, spec.i_y, spec.game_kind):
                player = replace(player, y=y)
            else:
                log.debug('player %s jump of %s levels rejected', player.id, command.levels)
        elif command.kind is CommandKind.KICK:
            if player.has_ball:
                kick = (player, command)
            else:
                log.debug('kick from player %s without the ball ignored', player.id)
        players.append(player)

    ball = state.ball
    if kick is not None:
        kicker, command = kick
        moved = ball_move(ball, command.axis, command.direction, command.tau_delta,
                          interval, spec.i_y, spec.bounds, spec.player_height,
                          spec.y_max, phi=kicker.phi)
        if moved is not ball:
            ball = replace(moved, holder=None)

    moved_state = replace(state, index=state.index + 1, time=state.time + spec.tick_period,
                          players=tuple(players), ball=ball)
    return settle(moved_state, spec)


def validate(state, spec):
    """Check every game state invariant.

    Returns:
        list of violation strings, empty when the state is valid
    """
    violations = []
    interval = state.interval
    x_max, z_max = spec.bounds
    height = spec.player_height
    ladder = [height + level * spec.i_y for level in range(spec.game_kind.jump_levels + 1)]

    if state.index < 0:
        violations.append('negative state index')
    if state.index == 0 and state.time != 0:
        violations.append('S_0 must start at T=0')
    if state.index > 0 and state.time <= 0:
        violations.append('time must be positive after S_0')
    if abs(interval - spec.interval) > TOLERANCE:
        violations.append('interval {} differs from grid {}'.format(interval, spec.interval))

    def check_ground(name, x, z):
        if not -TOLERANCE <= x <= x_max + TOLERANCE:
            violations.append('{}: x out of bounds'.format(name))
        if not -TOLERANCE <= z <= z_max + TOLERANCE:
            violations.append('{}: z out of bounds'.format(name))
        if not is_lattice_member(x, interval):
            violations.append('{}: x off lattice'.format(name))
        if not is_lattice_member(z, interval):
            violations.append('{}: z off lattice'.format(name))

    for p in state.players:
        name = 'player {}'.format(p.id)
        check_ground(name, p.x, p.z)
        if p.height != height:
            violations.append('{}: height differs from player height'.format(name))
        if not any(abs(p.y - y) <= TOLERANCE for y in ladder):
            violations.append('{}: y off height ladder'.format(name))
        if state.mdr is not None:
            in_ldr = classify(p.ground, state.mdr) is RegionKind.LDR
            if p.frozen != in_ldr:
                violations.append('{}: freeze flag mismatch'.format(name))

    ball = state.ball
    check_ground('ball', ball.x, ball.z)
    if ball.y < -TOLERANCE or ball.y > height + 2 * spec.i_y + TOLERANCE:
        violations.append('ball: y above ceiling')

    holders = [p for p in state.players if p.has_ball]
    if len(holders) > 1:
        violations.append('multiple holders')
    if ball.holder is None and holders:
        violations.append('holder flag without ball holder')
    if ball.holder is not None:
        if ball.holder not in state.player_ids:
            violations.append('ball held by unknown player {}'.format(ball.holder))
        else:
            holder = state.player(ball.holder)
            if not holder.has_ball:
                violations.append('holder mismatch')
            if not _same_point(holder.ground, ball.ground):
                violations.append('ball not with holder')
            if holder.frozen:
                violations.append('frozen holder')

    if state.mdr is None:
        violations.append('missing MDR')
    else:
        for cx, cz in state.mdr.corners:
            if not (0 <= cx <= x_max and 0 <= cz <= z_max):
                violations.append('MDR corner out of bounds')
                break
        if not state.mdr.contains(ball.ground):
            violations.append('ball outside MDR')

    return violations


# Canonical snapshot layout, little-endian and packed
SNAPSHOT_MAGIC = b'GLSS'
SNAPSHOT_VERSION = 1

HEADER_DTYPE = np.dtype([('version', '<u4'), ('index', '<i8'), ('time', '<f8'),
                         ('interval', '<f8'), ('rng_cursor', '<i8'), ('players', '<u4')])
BALL_DTYPE = np.dtype([('x', '<f8'), ('y', '<f8'), ('z', '<f8'), ('tau', '<i8'),
                       ('holder', '<i8')])
REGION_DTYPE = np.dtype([('anchor', '<f8', (2,)), ('mu', '<i8'), ('interval', '<f8'),
                         ('corners', '<f8', (4, 2)), ('bounds', '<f8', (2,))])
PLAYER_DTYPE = np.dtype([('id', '<i8'), ('x', '<f8'), ('y', '<f8'), ('z', '<f8'),
                         ('height', '<f8'), ('phi', '<i8'), ('has_ball', 'u1'),
                         ('frozen', 'u1')])


def encode_snapshot(state):
    """Serialize a state to the canonical versioned binary layout."""
    header = np.array([(SNAPSHOT_VERSION, state.index, state.time, state.interval,
                        state.rng_cursor, len(state.players))], dtype=HEADER_DTYPE)
    ball = state.ball
    ball_rec = np.array([(ball.x, ball.y, ball.z, ball.tau,
                          -1 if ball.holder is None else ball.holder)], dtype=BALL_DTYPE)
    mdr = state.mdr
    region_rec = np.array([(mdr.anchor, mdr.mu, mdr.interval, mdr.corners, mdr.bounds)],
                          dtype=REGION_DTYPE)
    player_rec = np.array([(p.id, p.x, p.y, p.z, p.height, p.phi, p.has_ball, p.frozen)
                           for p in state.players], dtype=PLAYER_DTYPE)

    return b''.join([SNAPSHOT_MAGIC, header.tobytes(), ball_rec.tobytes(),
                     region_rec.tobytes(), player_rec.tobytes()])


def decode_snapshot(data):
    """Rebuild a GameState from encode_snapshot output.

    Raises:
        ValueError on a foreign or unsupported payload
    """
    if data[:len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise ValueError('not a game snapshot')
    offset = len(SNAPSHOT_MAGIC)

    header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1, offset=offset)[0]
    if header['version'] != SNAPSHOT_VERSION:
        raise ValueError('unsupported snapshot version {}'.format(header['version']))
    offset += HEADER_DTYPE.itemsize
    ball_rec = np.frombuffer(data, dtype=BALL_DTYPE, count=1, offset=offset)[0]
    offset += BALL_DTYPE.itemsize
    region_rec = np.frombuffer(data, dtype=REGION_DTYPE, count=1, offset=offset)[0]
    offset += REGION_DTYPE.itemsize
    player_recs = np.frombuffer(data, dtype=PLAYER_DTYPE, count=int(header['players']),
                                offset=offset)

    holder = int(ball_rec['holder'])
    ball = BallState(x=float(ball_rec['x']), y=float(ball_rec['y']), z=float(ball_rec['z']),
                     tau=int(ball_rec['tau']), holder=None if holder < 0 else holder)
    region = Region(anchor=tuple(float(v) for v in region_rec['anchor']),
                    mu=int(region_rec['mu']), interval=float(region_rec['interval']),
                    corners=tuple(tuple(float(v) for v in c) for c in region_rec['corners']),
                    bounds=tuple(float(v) for v in region_rec['bounds']))
    players = tuple(PlayerState(id=int(r['id']), x=float(r['x']), y=float(r['y']),
                                z=float(r['z']), height=float(r['height']), phi=int(r['phi']),
                                has_ball=bool(r['has_ball']), frozen=bool(r['frozen']))
                    for r in player_recs)

    return GameState(index=int(header['index']), time=float(header['time']),
                     interval=float(header['interval']), players=players, ball=ball,
                     mdr=region, rng_cursor=int(header['rng_cursor']))


def state_hash(state):
    """SHA-256 of the canonical snapshot, used to verify replays."""
    return hashlib.sha256(encode_snapshot(state)).hexdigest()


def scoped_state(state, keep=()):
    """The per-client update: MDR players, the players in keep, and the ball."""
    keep = set(keep)
    return replace(state, players=tuple(p for p in state.players
                                        if not p.frozen or p.id in keep))
