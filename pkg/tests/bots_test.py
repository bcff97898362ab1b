import pytest

from gridlag.bots import *
from gridlag.game import CommandKind
from gridlag.scenarios import ScenarioConfig


@pytest.mark.parametrize("text, expected", [
    ('+x', ('x', 1)),
    ('-x', ('x', -1)),
    ('+z', ('z', 1)),
    ('-z', ('z', -1)),
])
def test_parse_direction(text, expected):
    assert parse_direction(text) == expected


def test_idle_script():
    script = build_script(ScenarioConfig(script='idle'), [1, 2])
    assert all(e.command.kind is CommandKind.IDLE for e in script.events(3, [1, 2]))
    assert script.cursor(3) == 0


def test_constant_script():
    config = ScenarioConfig(script='constant', duration=5, directions={1: '-z'})
    script = build_script(config, [1, 2])
    for tick in range(1, 6):
        first, second = script.events(tick, [1, 2])
        assert (first.command.axis, first.command.direction) == ('z', -1)
        assert (second.command.axis, second.command.direction) == ('z', 1)


def test_reverse_script_flips():
    config = ScenarioConfig(script='reverse', duration=12, reverse_every=4, directions={1: '+x'})
    script = build_script(config, [1])
    signs = [script.command(tick, 1).direction for tick in range(1, 13)]
    assert signs == [1] * 4 + [-1] * 4 + [1] * 4


def test_random_script_reproducible():
    config = ScenarioConfig(script='random', seed=17, duration=30)
    first = build_script(config, [1, 2, 3])
    second = build_script(config, [3, 2, 1])
    for tick in range(1, 31):
        assert first.events(tick, [1, 2, 3]) == second.events(tick, [1, 2, 3])
    assert first.cursor(30) == 30 * 3 * 4


def test_random_script_depends_on_seed():
    a = build_script(ScenarioConfig(seed=1, duration=30), [1, 2])
    b = build_script(ScenarioConfig(seed=2, duration=30), [1, 2])
    assert [a.command(t, 1) for t in range(1, 31)] != [b.command(t, 1) for t in range(1, 31)]


def test_unknown_script():
    with pytest.raises(ValueError):
        build_script(ScenarioConfig(script='chaos'), [1])
