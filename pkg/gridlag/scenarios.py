"""Scenarios

This module loads and validates scenario files. A scenario is a YAML
document with the sections scenario, topology, grid, game, predictor and
drops; unknown keys are rejected and every error names the offending line.

Transport presets (named link conditions) ship in presets.yaml next to this
module and may be extended with a user presets file.
"""

import os
import logging
from dataclasses import dataclass, field, replace

import yaml

from gridlag.kinematics import TALENTS, GameKind
from gridlag.netsim import TOPOLOGY_KINDS, NetConditions
from gridlag.partition import GridSpec

log = logging.getLogger(__name__)

PRESETS_FILE = os.path.join(os.path.dirname(__file__), 'presets.yaml')
FIXTURE_DIR = os.path.join(os.path.dirname(__file__), 'fixtures')

PREDICTOR_MODES = ('grid', 'dr_baseline', 'none')
BALL_GUARD_CHOICES = ('strict', 'inclusive')
SCRIPTS = ('idle', 'constant', 'reverse', 'random')
DIRECTIONS = ('+x', '-x', '+z', '-z')
LINK_KEYS = ('base_latency_ms', 'jitter_ms', 'loss_prob')

# section -> {yaml key: ScenarioConfig field}
SCHEMA = {
    'scenario': {'name': 'name', 'seed': 'seed', 'duration': 'duration', 'tick_ms': 'tick_ms'},
    'topology': {'kind': 'topology', 'clients': 'clients', 'link': 'link',
                 'server_link': 'server_link'},
    'grid': {'theta': 'theta', 'game_level': 'game_level', 'latency_ms': 'latency_ms',
             'adaptive': 'adaptive', 'min_points': 'min_points',
             'screen_width': 'screen_width', 'mu': 'mu'},
    'game': {'kind': 'game_kind', 'team_size': 'team_size', 'y_max': 'y_max',
             'player_height': 'player_height', 'special': 'special',
             'formation': 'formation', 'ball_start': 'ball_start', 'script': 'script',
             'reverse_every': 'reverse_every', 'directions': 'directions'},
    'predictor': {'mode': 'predictor', 'ball_guard': 'ball_guard', 'reconcile': 'reconcile'},
    'drops': {'ticks': 'drop_ticks', 'clients': 'drop_clients',
              'probability': 'drop_probability', 'late': 'late_ticks', 'late_ms': 'late_ms'},
}

FIELD_KEYS = dict((name, (section, key))
                  for section, keys in SCHEMA.items() for key, name in keys.items())


class ConfigError(ValueError):
    """A scenario file or config value is invalid.

    The message reads 'line N: section.key: problem' when the line is known.
    """

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = ''
        if line is not None:
            prefix += 'line {}: '.format(line)
        if key is not None:
            prefix += '{}: '.format(key)
        super(ConfigError, self).__init__(prefix + message)


def load_presets(path=PRESETS_FILE, base=None):
    """Load named NetConditions from a presets YAML file, merged over base."""
    presets = dict(base or {})
    with open(path, 'r') as presetfile:
        data = yaml.safe_load(presetfile) or {}

    for name, values in data.items():
        if not isinstance(values, dict) or set(values) - set(LINK_KEYS):
            raise ConfigError('malformed preset "{}" in {}'.format(name, path))
        try:
            presets[name] = NetConditions(profile=name, **values)
        except (TypeError, ValueError) as exc:
            raise ConfigError('preset "{}": {}'.format(name, exc))
    return presets


PRESETS = load_presets()


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one match."""

    name: str = 'scenario'
    seed: int = 0
    duration: int = 50
    tick_ms: float = 100.0
    topology: str = 'client_server'
    clients: int = 2
    link: object = 'ideal'
    server_link: object = None
    theta: float = 100.0
    game_level: int = 1
    latency_ms: float = 100.0
    adaptive: bool = True
    min_points: int = 10
    screen_width: float = 10.0
    mu: int = 1
    game_kind: str = 'football'
    team_size: int = 4
    y_max: float = 10.0
    player_height: float = 4.0
    special: dict = field(default_factory=dict)
    formation: tuple = ()
    ball_start: tuple = None
    script: str = 'random'
    reverse_every: int = 5
    directions: dict = field(default_factory=dict)
    predictor: str = 'grid'
    ball_guard: str = 'inclusive'
    reconcile: bool = False
    drop_ticks: tuple = ()
    drop_clients: tuple = None
    drop_probability: float = 0.0
    late_ticks: tuple = ()
    late_ms: float = 1.0

    @property
    def tick_period(self):
        """Server tick period in seconds."""
        return self.tick_ms / 1000.0

    @property
    def player_count(self):
        return len(self.formation) if self.formation else 2 * self.team_size

    def grid_spec(self):
        return GridSpec.create(theta=self.theta, game_level=self.game_level,
                               latency_rate=self.latency_ms, screen_width=self.screen_width,
                               min_points=self.min_points, y_max=self.y_max,
                               player_height=self.player_height, game_kind=self.game_kind,
                               tick_period=self.tick_period)

    def owners(self):
        """Map client index -> player ids it controls; player k goes to client (k-1) % n."""
        owned = dict((c, []) for c in range(self.clients))
        if self.clients:
            for k in range(1, self.player_count + 1):
                owned[(k - 1) % self.clients].append(k)
        return dict((c, tuple(ids)) for c, ids in owned.items())

    def dropped_clients(self):
        if self.drop_clients is None:
            return tuple(range(self.clients))
        return tuple(self.drop_clients)


def resolve_link(value, presets=None):
    """Turn a preset name or an explicit mapping into NetConditions."""
    presets = PRESETS if presets is None else presets
    if isinstance(value, NetConditions):
        return value
    if isinstance(value, str):
        if value not in presets:
            raise ConfigError('unknown transport preset "{}"'.format(value))
        return presets[value]
    if isinstance(value, dict):
        unknown = set(value) - set(LINK_KEYS)
        if unknown:
            raise ConfigError('unknown link keys {}'.format(sorted(unknown)))
        try:
            return NetConditions(**value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc))
    raise ConfigError('link must be a preset name or a mapping')


def _is_pair(value):
    return isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def check_config(config, presets=None):
    """Return a list of (field, problem) pairs, empty when the config is valid."""
    problems = []

    def need(ok, name, message):
        if not ok:
            problems.append((name, message))

    need(_is_int(config.seed), 'seed', 'must be an integer')
    need(_is_int(config.duration) and config.duration >= 2, 'duration',
         'must be an integer >= 2')
    need(_is_number(config.tick_ms) and config.tick_ms > 0, 'tick_ms', 'must be > 0')

    need(config.topology in TOPOLOGY_KINDS, 'topology',
         'must be one of {}'.format(', '.join(TOPOLOGY_KINDS)))
    need(_is_int(config.clients) and config.clients >= 0, 'clients', 'must be >= 0')
    if config.topology == 'p2p':
        need(_is_int(config.clients) and config.clients >= 1, 'clients',
             'a peer-to-peer match needs at least one peer')
    for name in ('link', 'server_link'):
        value = getattr(config, name)
        if value is None and name == 'server_link':
            continue
        try:
            resolve_link(value, presets)
        except ConfigError as exc:
            problems.append((name, str(exc)))

    for name in ('theta', 'latency_ms', 'screen_width'):
        need(_is_number(getattr(config, name)) and getattr(config, name) > 0, name, 'must be > 0')
    need(_is_number(config.game_level) and config.game_level > 0, 'game_level', 'must be > 0')
    need(isinstance(config.adaptive, bool), 'adaptive', 'must be true or false')
    need(_is_int(config.min_points) and config.min_points >= 2, 'min_points', 'must be >= 2')
    need(_is_int(config.mu) and config.mu >= 1, 'mu', 'must be >= 1')

    need(config.game_kind in [k.value for k in GameKind], 'game_kind',
         'must be one of {}'.format(', '.join(k.value for k in GameKind)))
    need(_is_number(config.player_height) and config.player_height > 0, 'player_height',
         'must be > 0')
    need(_is_number(config.y_max) and _is_number(config.player_height) and
         config.y_max > config.player_height, 'y_max', 'must exceed player_height')

    width = config.screen_width if _is_number(config.screen_width) else 0
    if config.formation:
        if not all(_is_pair(p) for p in config.formation):
            problems.append(('formation', 'must be a list of [x, z] pairs'))
        elif not all(0 <= x <= width and 0 <= z <= width for x, z in config.formation):
            problems.append(('formation', 'points must lie inside the field'))
    else:
        need(_is_int(config.team_size) and config.team_size >= 1, 'team_size', 'must be >= 1')
    if config.ball_start is not None:
        if not _is_pair(config.ball_start):
            problems.append(('ball_start', 'must be an [x, z] pair'))
        else:
            need(0 <= config.ball_start[0] <= width and 0 <= config.ball_start[1] <= width,
                 'ball_start', 'must lie inside the field')

    count = config.player_count if (_is_int(config.team_size) or config.formation) else 0
    if not isinstance(config.special, dict):
        problems.append(('special', 'must map player ids to talent multipliers'))
    else:
        for k, phi in config.special.items():
            need(_is_int(k) and 1 <= k <= count, 'special', 'unknown player id {}'.format(k))
            need(phi in TALENTS, 'special', 'talent must be one of {}'.format(TALENTS))

    need(config.script in SCRIPTS, 'script', 'must be one of {}'.format(', '.join(SCRIPTS)))
    need(_is_int(config.reverse_every) and config.reverse_every >= 1, 'reverse_every',
         'must be >= 1')
    if not isinstance(config.directions, dict):
        problems.append(('directions', 'must map player ids to directions'))
    else:
        for k, direction in config.directions.items():
            need(_is_int(k) and 1 <= k <= count, 'directions', 'unknown player id {}'.format(k))
            need(direction in DIRECTIONS, 'directions',
                 'must be one of {}'.format(', '.join(DIRECTIONS)))

    need(config.predictor in PREDICTOR_MODES, 'predictor',
         'must be one of {}'.format(', '.join(PREDICTOR_MODES)))
    need(config.ball_guard in BALL_GUARD_CHOICES, 'ball_guard',
         'must be one of {}'.format(', '.join(BALL_GUARD_CHOICES)))
    need(isinstance(config.reconcile, bool), 'reconcile', 'must be true or false')

    for name in ('drop_ticks', 'late_ticks'):
        ticks = getattr(config, name)
        need(all(_is_int(t) and 1 <= t <= config.duration for t in ticks)
             if _is_int(config.duration) else False,
             name, 'ticks must lie in 1..duration')
    if config.drop_clients is not None:
        need(all(_is_int(c) and 0 <= c < config.clients for c in config.drop_clients),
             'drop_clients', 'unknown client index')
    need(_is_number(config.drop_probability) and 0 <= config.drop_probability <= 1,
         'drop_probability', 'must lie in [0, 1]')
    need(_is_number(config.late_ms) and config.late_ms > 0, 'late_ms', 'must be > 0')

    return problems


def _line_map(node, path=(), lines=None):
    """Record the 1-based line of every mapping key in a composed YAML tree."""
    lines = {} if lines is None else lines
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key_path = path + (key_node.value,)
            lines[key_path] = key_node.start_mark.line + 1
            _line_map(value_node, key_path, lines)
    return lines


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def parse_config(text, source='<string>', presets=None):
    """Parse and validate scenario YAML text.

    Raises:
        ConfigError naming the line of the first problem
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, 'problem_mark', None)
        raise ConfigError('{}: malformed YAML: {}'.format(source, getattr(exc, 'problem', exc)),
                          line=mark.line + 1 if mark else None)

    lines = _line_map(node)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError('{}: a scenario must be a mapping of sections'.format(source), line=1)

    values = {}
    for section, body in data.items():
        if section not in SCHEMA:
            raise ConfigError('unknown section', line=lines.get((section,)), key=section)
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ConfigError('section must be a mapping', line=lines.get((section,)),
                              key=section)
        for key, value in body.items():
            if key not in SCHEMA[section]:
                raise ConfigError('unknown key', line=lines.get((section, key)),
                                  key='{}.{}'.format(section, key))
            values[SCHEMA[section][key]] = _freeze(value)

    try:
        config = ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc))

    problems = check_config(config, presets)
    if problems:
        name, message = problems[0]
        section, key = FIELD_KEYS[name]
        raise ConfigError(message, line=lines.get((section, key)),
                          key='{}.{}'.format(section, key))
    return config


def load_config(path, presets=None):
    """Load a scenario file from disk."""
    with open(path, 'r') as scenariofile:
        text = scenariofile.read()
    config = parse_config(text, source=path, presets=presets)
    log.debug('loaded scenario "%s" from %s', config.name, path)
    return config


def override(config, presets=None, **changes):
    """Copy a config with some fields changed, re-validated. None values are ignored."""
    config = replace(config, **dict((k, v) for k, v in changes.items() if v is not None))
    problems = check_config(config, presets)
    if problems:
        name, message = problems[0]
        section, key = FIELD_KEYS[name]
        raise ConfigError(message, key='{}.{}'.format(section, key))
    return config


def fixture_path(name):
    return os.path.join(FIXTURE_DIR, '{}.yaml'.format(name))
