import pytest

from gridlag.netsim import NetConditions
from gridlag.scenarios import *

SCENARIO = """\
scenario:
  name: small
  seed: 3
  duration: 10

topology:
  kind: network_server
  clients: 3
  link: bluetooth-like
  server_link: {base_latency_ms: 5, jitter_ms: 1}

grid:
  latency_ms: 200
  min_points: 20

game:
  team_size: 2
  special: {1: 3}
  script: reverse
  directions: {2: '-z'}

drops:
  ticks: [3, 4]
  clients: [1]
"""


def test_parse_config():
    config = parse_config(SCENARIO)
    assert config.name == 'small'
    assert config.seed == 3
    assert config.topology == 'network_server'
    assert config.special == {1: 3}
    assert config.directions == {2: '-z'}
    assert config.drop_ticks == (3, 4)
    assert config.dropped_clients() == (1,)
    assert config.player_count == 4
    assert config.grid_spec().interval == pytest.approx(0.5)


def test_defaults():
    config = parse_config('')
    assert config == ScenarioConfig()
    assert config.tick_period == pytest.approx(0.1)
    assert config.dropped_clients() == (0, 1)


def test_owners_round_robin():
    config = parse_config(SCENARIO)
    assert config.owners() == {0: (1, 4), 1: (2,), 2: (3,)}


def test_owners_without_clients():
    config = ScenarioConfig(clients=0)
    assert config.owners() == {}


@pytest.mark.parametrize("text, line, key", [
    ("scenario:\n  name: x\n  colour: red\n", 3, 'scenario.colour'),
    ("scenario:\n  name: x\nweather:\n  rain: 1\n", 3, 'weather'),
    ("scenario:\n  duration: 1\n", 2, 'scenario.duration'),
    ("grid:\n  theta: 100\n  min_points: 1\n", 3, 'grid.min_points'),
    ("topology:\n  kind: client_server\n  link: dial-up\n", 3, 'topology.link'),
    ("game:\n  team_size: 2\n  special: {7: 2}\n", 3, 'game.special'),
    ("predictor:\n  mode: oracle\n", 2, 'predictor.mode'),
    ("drops:\n  ticks: [0]\n", 2, 'drops.ticks'),
])
def test_config_error_names_line(text, line, key):
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert e.value.line == line
    assert e.value.key == key
    assert str(e.value).startswith('line {}: {}: '.format(line, key))


def test_malformed_yaml():
    with pytest.raises(ConfigError) as e:
        parse_config("scenario:\n  name: [unclosed\n")
    assert e.value.line is not None


def test_p2p_needs_a_peer():
    with pytest.raises(ConfigError):
        parse_config("topology:\n  kind: p2p\n  clients: 0\n")


def test_packaged_presets():
    for name in ('bluetooth-like', 'wifi-like', 'lan-like', 'ideal'):
        assert isinstance(PRESETS[name], NetConditions)
        assert PRESETS[name].profile == name


def test_user_presets_merge(tmp_path):
    path = tmp_path / 'presets.yaml'
    path.write_text("gprs-like:\n  base_latency_ms: 300\n  jitter_ms: 50\n  loss_prob: 0.05\n")
    presets = load_presets(str(path), base=PRESETS)
    assert presets['gprs-like'].base_latency_ms == 300
    assert 'ideal' in presets

    config = parse_config("topology:\n  link: gprs-like\n", presets=presets)
    assert resolve_link(config.link, presets).loss_prob == 0.05


def test_malformed_preset(tmp_path):
    path = tmp_path / 'presets.yaml'
    path.write_text("broken:\n  base_latency_ms: 0\n")
    with pytest.raises(ConfigError):
        load_presets(str(path))


def test_resolve_link_mapping():
    link = resolve_link({'base_latency_ms': 12, 'loss_prob': 0.5})
    assert link.base_latency_ms == 12
    with pytest.raises(ConfigError):
        resolve_link({'latency': 12})


def test_override():
    config = parse_config(SCENARIO)
    changed = override(config, seed=99, ball_guard=None)
    assert changed.seed == 99
    assert changed.ball_guard == config.ball_guard
    with pytest.raises(ConfigError):
        override(config, duration=1)


@pytest.mark.parametrize("name", ['mdr_layout', 'fine_lattice', 'possession'])
def test_fixtures_load(name):
    assert load_config(fixture_path(name)).name == name
