"""Network simulation

This module provides the seeded discrete-event network underneath a match:
link conditions, time-stamped packets, the three topologies (peer-to-peer,
client-server and the two-server network-server layout), a per-flow jitter
buffer and the smoothed latency estimator that drives re-partitioning.

All times are simulated milliseconds on a simpy clock.
"""

import logging
from collections import deque
from dataclasses import dataclass, replace

import networkx as nx

from gridlag.seeding import derive_rng

log = logging.getLogger(__name__)

P2P = 'p2p'
CLIENT_SERVER = 'client_server'
NETWORK_SERVER = 'network_server'
TOPOLOGY_KINDS = (P2P, CLIENT_SERVER, NETWORK_SERVER)

SERVER = 'server'
PRIMARY_SERVER = 's0'
SECONDARY_SERVER = 's1'

EWMA_FACTOR = 0.2

# most recent send/drop/deliver events kept per network
TRACE_LIMIT = 4096


class LatencyNotReady(RuntimeError):
    """No round-trip sample has been observed yet."""


@dataclass(frozen=True)
class NetConditions:
    """Link behaviour: one-way base latency, jitter half-width and loss."""

    base_latency_ms: float
    jitter_ms: float = 0.0
    loss_prob: float = 0.0
    profile: str = 'custom'

    def __post_init__(self):
        if self.base_latency_ms <= 0:
            raise ValueError('base latency must be positive, got {}'.format(self.base_latency_ms))
        if self.jitter_ms < 0:
            raise ValueError('jitter must be non-negative, got {}'.format(self.jitter_ms))
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError('loss probability must lie in [0, 1], got {}'.format(self.loss_prob))


@dataclass(frozen=True)
class Packet:
    """A time-stamped packet. Sequence numbers count per flow (sender to receiver).

    echo_seq and hold_ms carry the last packet this sender received from the
    receiver and how long it was held, for round-trip measurement.
    """

    seq: int
    sent_at: float
    sender: str
    payload: object = None
    echo_seq: int = None
    hold_ms: float = 0.0


def client_node(index):
    return 'c{}'.format(index)


def send(packet, link, rng):
    """Decide the fate of one packet on one link.

    Returns:
        the delivery time sent_at + base + U(-jitter, +jitter), with the delay
        floored at 0, or None when the packet is dropped
    """
    dropped = rng.random() < link.loss_prob
    jitter = rng.uniform(-link.jitter_ms, link.jitter_ms) if link.jitter_ms > 0 else 0.0
    if dropped:
        return None
    return packet.sent_at + max(0.0, link.base_latency_ms + jitter)


def build_topology(kind, clients, link, server_link=None):
    """Build the node graph of a topology.

    Edges carry their NetConditions under the 'conditions' attribute and
    nodes their 'role' (client or server).

    p2p:            complete graph over the clients
    client_server:  star around one server
    network_server: s0 - s1 joined by server_link, clients attached to s0
                    and s1 alternately
    """
    if kind not in TOPOLOGY_KINDS:
        raise ValueError('unknown topology "{}"'.format(kind))
    if clients < 0:
        raise ValueError('client count must be non-negative')

    names = [client_node(i) for i in range(clients)]
    graph = nx.Graph(kind=kind)
    graph.add_nodes_from(names, role='client')

    if kind == P2P:
        if clients < 1:
            raise ValueError('a peer-to-peer topology needs at least one peer')
        for a, b in nx.complete_graph(names).edges():
            graph.add_edge(a, b, conditions=link)
    elif kind == CLIENT_SERVER:
        graph.add_node(SERVER, role='server')
        for name in names:
            graph.add_edge(SERVER, name, conditions=link)
    else:
        graph.add_node(PRIMARY_SERVER, role='server')
        graph.add_node(SECONDARY_SERVER, role='server')
        graph.add_edge(PRIMARY_SERVER, SECONDARY_SERVER, conditions=server_link or link)
        for i, name in enumerate(names):
            graph.add_edge(PRIMARY_SERVER if i % 2 == 0 else SECONDARY_SERVER, name,
                           conditions=link)

    return graph


def authority(graph):
    """The node that commits game states."""
    kind = graph.graph['kind']
    if kind == CLIENT_SERVER:
        return SERVER
    if kind == NETWORK_SERVER:
        return PRIMARY_SERVER
    return client_node(0)


def attached_server(graph, node):
    """The server a client hangs off, or None in a peer-to-peer graph."""
    for neighbour in graph.neighbors(node):
        if graph.nodes[neighbour]['role'] == 'server':
            return neighbour
    return None


def traffic_count(kind, clients, rounds):
    """Messages exchanged over a number of rounds.

    p2p n(n-1) per round, client_server 2n per round and network_server
    2n plus one inter-server exchange each way per round.
    """
    if clients < 1:
        raise ValueError('traffic count needs at least one client')
    if rounds < 0:
        raise ValueError('rounds must be non-negative')

    if kind == P2P:
        return clients * (clients - 1) * rounds
    if kind == CLIENT_SERVER:
        return 2 * clients * rounds
    if kind == NETWORK_SERVER:
        return 2 * clients * rounds + 2 * rounds
    raise ValueError('unknown topology "{}"'.format(kind))


class Network(object):
    """Moves packets over a topology graph on a simpy environment.

    Every hop draws from its own seeded stream. Counters keep
    sent == delivered + dropped + in_flight at any instant.
    """

    def __init__(self, env, graph, seed, trace_limit=TRACE_LIMIT):
        self.env = env
        self.graph = graph
        self.seed = seed
        self.sent = 0
        self.delivered = 0
        self.dropped = 0
        self.in_flight = 0
        self.trace = deque(maxlen=trace_limit)
        self._streams = {}

    def _stream(self, a, b):
        key = tuple(sorted((a, b)))
        if key not in self._streams:
            self._streams[key] = derive_rng(self.seed, 'link:{}-{}'.format(*key))
        return self._streams[key]

    def transmit(self, packet, dst, deliver, drop=False, arrive_at=None):
        """Send a packet over the direct link to dst.

        Args:
            packet (Packet): stamped with the current simulated time
            dst (str): neighbouring node
            deliver (callable): deliver(packet, dst, arrival_ms) on arrival
            drop (bool): force a loss, used by scripted drop schedules
            arrive_at (float): force the arrival time, used by late schedules

        Returns:
            the scheduled arrival time, or None when the packet was dropped
        """
        if packet.sent_at != self.env.now:
            packet = replace(packet, sent_at=self.env.now)
        conditions = self.graph.edges[packet.sender, dst]['conditions']
        arrival = send(packet, conditions, self._stream(packet.sender, dst))
        self.sent += 1

        if drop or arrival is None:
            self.dropped += 1
            self.trace.append((self.env.now, 'drop', packet.sender, dst, packet.seq))
            log.debug('packet %s from %s to %s dropped', packet.seq, packet.sender, dst)
            return None

        if arrive_at is not None:
            arrival = max(arrive_at, packet.sent_at)
        self.in_flight += 1
        self.trace.append((self.env.now, 'send', packet.sender, dst, packet.seq))
        self.env.process(self._deliver(packet, dst, arrival, deliver))
        return arrival

    def _deliver(self, packet, dst, arrival, deliver):
        yield self.env.timeout(arrival - self.env.now)
        self.in_flight -= 1
        self.delivered += 1
        self.trace.append((self.env.now, 'deliver', packet.sender, dst, packet.seq))
        deliver(packet, dst, self.env.now)


class JitterBuffer(object):
    """Reorder buffer for one flow.

    Packets are released in sequence order. A missing sequence number holds
    back its successors until it arrives or a tick boundary declares it lost.
    """

    def __init__(self, first_seq=1):
        self._expected = first_seq
        self._held = {}
        self._last = None
        self.gaps = []
        self.releases = []

    @property
    def expected(self):
        return self._expected

    def __len__(self):
        return len(self._held)

    def add(self, packet):
        """Hold a packet; returns False for duplicates and already-passed seqs."""
        if packet.seq < self._expected or packet.seq in self._held:
            log.debug('jitter buffer discarded seq %s (expecting %s)', packet.seq, self._expected)
            return False
        self._held[packet.seq] = packet
        return True

    def pop(self, now, tick_boundary=False, through=None):
        """Release the in-order run of held packets.

        Args:
            now (float): current simulated time
            tick_boundary (bool): declare missing predecessors lost
            through (int): highest seq that may be released or declared lost

        Returns:
            list of packets in seq order
        """
        horizon = self._expected
        if tick_boundary:
            if through is not None:
                horizon = through + 1
            elif self._held:
                horizon = max(self._held)

        released = []
        while True:
            if self._expected in self._held and (through is None or self._expected <= through):
                packet = self._held.pop(self._expected)
                released.append(packet)
                self._release(packet, now)
            elif self._expected < horizon:
                self.gaps.append(self._expected)
                log.debug('seq %s declared lost at tick boundary', self._expected)
            else:
                break
            self._expected += 1

        return released

    def _release(self, packet, now):
        # spacing between releases follows the senders' timestamps
        if self._last is None:
            release_at = now
        else:
            last_release, last_sent = self._last
            release_at = max(now, last_release + (packet.sent_at - last_sent))
        self._last = (release_at, packet.sent_at)
        self.releases.append((release_at, packet.seq))


def jitter_buffer_pop(buffer, now, tick_boundary=False, through=None):
    return buffer.pop(now, tick_boundary=tick_boundary, through=through)


class LatencyEstimator(object):
    """Exponentially weighted moving average of round-trip samples."""

    def __init__(self, factor=EWMA_FACTOR):
        if not 0 < factor <= 1:
            raise ValueError('EWMA factor must lie in (0, 1]')
        self.factor = factor
        self.samples = 0
        self._estimate = None

    def add_sample(self, rtt_ms):
        if rtt_ms < 0:
            raise ValueError('negative round-trip sample {}'.format(rtt_ms))
        if self._estimate is None:
            self._estimate = float(rtt_ms)
        else:
            self._estimate += self.factor * (rtt_ms - self._estimate)
        self.samples += 1
        return self._estimate

    @property
    def ready(self):
        return self._estimate is not None

    @property
    def estimate(self):
        if self._estimate is None:
            raise LatencyNotReady('no round-trip samples yet')
        return self._estimate


def measure_latency(estimator):
    """Current smoothed latency rate L of a node.

    Raises:
        LatencyNotReady before the first sample
    """
    return estimator.estimate
