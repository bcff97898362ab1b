import pytest
import numpy as np
import simpy

from gridlag.netsim import *

IDEAL = NetConditions(base_latency_ms=1)


def _packet(seq, sent_at=0.0, sender='c0'):
    return Packet(seq=seq, sent_at=sent_at, sender=sender)


@pytest.mark.parametrize("kwargs", [
    dict(base_latency_ms=0),
    dict(base_latency_ms=5, jitter_ms=-1),
    dict(base_latency_ms=5, loss_prob=1.5),
])
def test_conditions_rejected(kwargs):
    with pytest.raises(ValueError):
        NetConditions(**kwargs)


def test_send_without_jitter():
    rng = np.random.default_rng(0)
    assert send(_packet(1, sent_at=10.0), NetConditions(base_latency_ms=40), rng) == 50.0


def test_send_jitter_bounds():
    rng = np.random.default_rng(1)
    link = NetConditions(base_latency_ms=5, jitter_ms=3)
    delays = [send(_packet(1), link, rng) for _ in range(2000)]
    assert min(delays) >= 2
    assert max(delays) <= 8


def test_send_delay_never_negative():
    rng = np.random.default_rng(2)
    link = NetConditions(base_latency_ms=1, jitter_ms=5)
    assert all(send(_packet(1, sent_at=3.0), link, rng) >= 3.0 for _ in range(500))


def test_send_loss_rate():
    rng = np.random.default_rng(0)
    link = NetConditions(base_latency_ms=5, loss_prob=0.1)
    lost = sum(send(_packet(1), link, rng) is None for _ in range(10000))
    assert abs(lost / 10000.0 - 0.1) <= 0.01


def test_send_deterministic():
    link = NetConditions(base_latency_ms=40, jitter_ms=15, loss_prob=0.2)
    first = [send(_packet(i), link, np.random.default_rng(9)) for i in range(50)]
    second = [send(_packet(i), link, np.random.default_rng(9)) for i in range(50)]
    assert first == second


@pytest.mark.parametrize("kind, clients, nodes, edges", [
    (P2P, 4, 4, 6),
    (CLIENT_SERVER, 3, 4, 3),
    (NETWORK_SERVER, 4, 6, 5),
])
def test_build_topology(kind, clients, nodes, edges):
    graph = build_topology(kind, clients, IDEAL)
    assert graph.number_of_nodes() == nodes
    assert graph.number_of_edges() == edges


def test_network_server_layout():
    wifi = NetConditions(base_latency_ms=5)
    graph = build_topology(NETWORK_SERVER, 3, IDEAL, wifi)
    assert authority(graph) == PRIMARY_SERVER
    assert graph.edges[PRIMARY_SERVER, SECONDARY_SERVER]['conditions'] is wifi
    assert [attached_server(graph, client_node(i)) for i in range(3)] == \
        [PRIMARY_SERVER, SECONDARY_SERVER, PRIMARY_SERVER]


def test_p2p_authority():
    graph = build_topology(P2P, 3, IDEAL)
    assert authority(graph) == 'c0'
    assert attached_server(graph, 'c1') is None


@pytest.mark.parametrize("kind, clients", [
    ('mesh', 2),
    (P2P, 0),
    (CLIENT_SERVER, -1),
])
def test_build_topology_rejects(kind, clients):
    with pytest.raises(ValueError):
        build_topology(kind, clients, IDEAL)


@pytest.mark.parametrize("kind, clients, rounds, expected", [
    (P2P, 4, 1, 12),
    (P2P, 1, 10, 0),
    (CLIENT_SERVER, 4, 3, 24),
    (NETWORK_SERVER, 2, 1, 6),
])
def test_traffic_count(kind, clients, rounds, expected):
    assert traffic_count(kind, clients, rounds) == expected


def test_traffic_count_needs_clients():
    with pytest.raises(ValueError):
        traffic_count(CLIENT_SERVER, 0, 1)


def test_network_counters():
    env = simpy.Environment()
    graph = build_topology(CLIENT_SERVER, 2, NetConditions(base_latency_ms=10, loss_prob=0.3))
    network = Network(env, graph, seed=5)
    arrivals = []

    for seq in range(1, 41):
        network.transmit(_packet(seq), SERVER, lambda p, dst, at: arrivals.append((p.seq, at)))
        assert network.sent == network.delivered + network.dropped + network.in_flight
    env.run()

    assert network.in_flight == 0
    assert network.delivered == len(arrivals)
    assert network.delivered + network.dropped == 40
    assert all(at == 10 for _, at in arrivals)


def test_network_forced_drop_and_late():
    env = simpy.Environment()
    network = Network(env, build_topology(CLIENT_SERVER, 1, IDEAL), seed=0)
    arrivals = []
    assert network.transmit(_packet(1), SERVER, lambda *a: arrivals.append(a), drop=True) is None
    assert network.transmit(_packet(2), SERVER, lambda *a: arrivals.append(a),
                            arrive_at=101.0) == 101.0
    env.run()
    assert network.dropped == 1
    assert arrivals[0][2] == 101.0


def test_network_trace_is_bounded():
    env = simpy.Environment()
    network = Network(env, build_topology(CLIENT_SERVER, 1, IDEAL), seed=0, trace_limit=8)
    for seq in range(1, 21):
        network.transmit(_packet(seq), SERVER, lambda *a: None)
    env.run()
    assert network.delivered == 20
    assert len(network.trace) == 8
    assert network.trace[-1][1] == 'deliver'


def test_jitter_buffer_reorder_trace():
    buffer = JitterBuffer()
    assert buffer.add(_packet(2, sent_at=100))
    assert buffer.pop(now=101) == []

    assert buffer.add(_packet(1, sent_at=0))
    assert [p.seq for p in buffer.pop(now=102)] == [1, 2]

    assert buffer.add(_packet(4, sent_at=300))
    assert buffer.pop(now=303) == []
    assert [p.seq for p in buffer.pop(now=400, tick_boundary=True)] == [4]
    assert buffer.gaps == [3]
    assert buffer.expected == 5


def test_jitter_buffer_discards_stale_and_duplicates():
    buffer = JitterBuffer()
    assert buffer.add(_packet(1))
    assert not buffer.add(_packet(1))
    buffer.pop(now=0)
    assert not buffer.add(_packet(1))
    assert len(buffer) == 0


def test_jitter_buffer_through_limit():
    buffer = JitterBuffer()
    buffer.add(_packet(1))
    buffer.add(_packet(3))
    released = jitter_buffer_pop(buffer, now=100, tick_boundary=True, through=2)
    assert [p.seq for p in released] == [1]
    assert buffer.gaps == [2]
    assert len(buffer) == 1


def test_jitter_buffer_release_spacing():
    buffer = JitterBuffer()
    buffer.add(_packet(1, sent_at=0))
    buffer.add(_packet(2, sent_at=100))
    buffer.pop(now=50)
    assert buffer.releases == [(50, 1), (150, 2)]


def test_latency_estimator_converges():
    estimator = LatencyEstimator()
    estimator.add_sample(0)
    for _ in range(25):
        estimator.add_sample(100)
    assert estimator.estimate > 99
    assert estimator.samples == 26


def test_latency_estimator_seeded_by_first_sample():
    estimator = LatencyEstimator()
    assert not estimator.ready
    with pytest.raises(LatencyNotReady):
        measure_latency(estimator)
    estimator.add_sample(80)
    assert measure_latency(estimator) == 80
    estimator.add_sample(180)
    assert measure_latency(estimator) == pytest.approx(100)


def test_latency_estimator_rejects_negative():
    with pytest.raises(ValueError):
        LatencyEstimator().add_sample(-1)
