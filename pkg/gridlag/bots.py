"""Bots

This module pre-generates the per-player input scripts that drive a match.
A script is fixed before the match starts so that the lossy run and its
lossless shadow replay exactly the same key presses.
"""

import logging

from gridlag.game import Command, CommandKind, IDLE, InputEvent
from gridlag.kinematics import X_AXIS, Z_AXIS
from gridlag.seeding import derive_rng

log = logging.getLogger(__name__)

DEFAULT_DIRECTIONS = ('+x', '+z', '-x', '-z')

# weights of idle, move, jump and kick in the random script
RANDOM_WEIGHTS = (0.2, 0.6, 0.1, 0.1)


def parse_direction(text):
    """'+x' -> ('x', 1), '-z' -> ('z', -1)."""
    sign = {'+': 1, '-': -1}[text[0]]
    axis = {'x': X_AXIS, 'z': Z_AXIS}[text[1]]
    return axis, sign


def default_direction(player_id):
    return DEFAULT_DIRECTIONS[(player_id - 1) % len(DEFAULT_DIRECTIONS)]


class InputScript(object):
    """Commands keyed by (tick, player id); anything absent is idle."""

    def __init__(self, commands=None, draws=None):
        self._commands = dict(commands or {})
        self._draws = dict(draws or {})

    def command(self, tick, player_id):
        return self._commands.get((tick, player_id), IDLE)

    def events(self, tick, player_ids, issued_at=0.0):
        """One input event per owned player for the given tick."""
        return tuple(InputEvent(player_id=k, command=self.command(tick, k), issued_at=issued_at)
                     for k in player_ids)

    def cursor(self, tick):
        """Random draws consumed by the script up to and including a tick."""
        return self._draws.get(tick, 0)


def _constant(config, player_ids):
    commands = {}
    for k in player_ids:
        axis, sign = parse_direction(config.directions.get(k, default_direction(k)))
        for tick in range(1, config.duration + 1):
            commands[(tick, k)] = Command(CommandKind.MOVE, axis=axis, direction=sign)
    return commands


def _reverse(config, player_ids):
    commands = {}
    for k in player_ids:
        axis, sign = parse_direction(config.directions.get(k, default_direction(k)))
        for tick in range(1, config.duration + 1):
            flipped = ((tick - 1) // config.reverse_every) % 2 == 1
            commands[(tick, k)] = Command(CommandKind.MOVE, axis=axis,
                                          direction=-sign if flipped else sign)
    return commands


def _random(config, player_ids):
    rng = derive_rng(config.seed, 'bots')
    commands = {}
    draws = {}
    used = 0
    for tick in range(1, config.duration + 1):
        for k in player_ids:
            kind = rng.choice(4, p=RANDOM_WEIGHTS)
            axis = X_AXIS if rng.random() < 0.5 else Z_AXIS
            sign = 1 if rng.random() < 0.5 else -1
            tau_delta = int(rng.integers(-1, 2))
            used += 4
            if kind == 1:
                commands[(tick, k)] = Command(CommandKind.MOVE, axis=axis, direction=sign)
            elif kind == 2:
                commands[(tick, k)] = Command(CommandKind.JUMP, levels=1)
            elif kind == 3:
                commands[(tick, k)] = Command(CommandKind.KICK, axis=axis, direction=sign,
                                              tau_delta=tau_delta)
        draws[tick] = used
    return commands, draws


def build_script(config, player_ids):
    """Pre-generate the whole match's inputs for the given players."""
    player_ids = sorted(player_ids)
    if config.script == 'idle':
        return InputScript()
    if config.script == 'constant':
        return InputScript(_constant(config, player_ids))
    if config.script == 'reverse':
        return InputScript(_reverse(config, player_ids))
    if config.script == 'random':
        commands, draws = _random(config, player_ids)
        return InputScript(commands, draws)
    raise ValueError('unknown script "{}"'.format(config.script))
