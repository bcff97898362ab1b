"""Server

This module runs a match: the fixed-period authoritative tick with
late-as-lost input handling and predictor fill-in, and the simulated world
around it (client processes, the secondary server relay of the
network-server layout, round-trip sampling and adaptive re-partitioning).

A lossless shadow of the match is stepped alongside with the same script
and serves as ground truth for the prediction error.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, replace

import simpy

from gridlag.bots import build_script
from gridlag.game import (decode_snapshot, default_state, encode_snapshot, scoped_state,
                          settle, step)
from gridlag.kinematics import clamp
from gridlag.metrics import MetricsRecord, ball_step, is_stalled, prediction_error
from gridlag.netsim import (NETWORK_SERVER, P2P, SECONDARY_SERVER, JitterBuffer,
                            LatencyEstimator, Network, Packet, attached_server, authority,
                            build_topology, client_node)
from gridlag.partition import compute_rho, needs_repartition, resnap, snap
from gridlag.predictor import (SingleAxisViolation, dr_baseline, pair_from_history,
                               predict_state)
from gridlag.scenarios import resolve_link
from gridlag.seeding import derive_rng

log = logging.getLogger(__name__)

MODE_GRID = 'grid'
MODE_DR = 'dr_baseline'
MODE_NONE = 'none'


@dataclass(frozen=True)
class TickResult:
    state: object
    predicted: bool
    missing: tuple
    lost: int


def _snap_baseline(state, spec):
    """Put a dead-reckoned state back onto the lattice and the height ladder."""
    interval = state.interval
    ladder = [spec.player_height + level * spec.i_y
              for level in range(spec.game_kind.jump_levels + 1)]
    players = tuple(replace(p, x=snap(p.x, interval, spec.x_max), z=snap(p.z, interval, spec.z_max),
                            y=min(ladder, key=lambda y: abs(y - p.y)))
                    for p in state.players)
    ball = replace(state.ball, x=snap(state.ball.x, interval, spec.x_max),
                   z=snap(state.ball.z, interval, spec.z_max),
                   y=clamp(state.ball.y, 0.0, spec.player_height + 2 * spec.i_y))
    return replace(state, players=players, ball=ball)


def _fill_missing(state, committed, missing, present, spec, history, mode, ball_guard):
    """Returns (state, filled); filled is False when the predictor did not run."""
    if mode == MODE_NONE or len(history) < 2:
        return committed, False

    pair = pair_from_history(history, spec)
    try:
        if mode == MODE_GRID:
            predicted = predict_state(pair, spec, ball_guard=ball_guard)
        else:
            predicted = _snap_baseline(dr_baseline(pair, spec.tick_period, spec), spec)
    except SingleAxisViolation as exc:
        log.warning('prediction skipped at tick %s: %s', committed.index, exc)
        return committed, False

    missing = set(missing)
    players = []
    for player in committed.players:
        if player.id in missing:
            guess = predicted.player(player.id)
            player = replace(player, x=guess.x, y=guess.y, z=guess.z)
        players.append(player)

    ball = committed.ball
    if state.ball.holder is None and not present:
        ball = replace(predicted.ball, holder=None)

    return settle(replace(committed, players=tuple(players), ball=ball), spec), True


def server_tick(state, arrivals, period, spec, controlled=None, history=(), mode=MODE_GRID,
                ball_guard='inclusive', window_end=None):
    """Commit the next game state from the inputs that made it in time.

    Args:
        state (GameState): the last committed state S_{n-1}
        arrivals (list): (arrival_ms, Packet) pairs whose payloads are InputEvents
        period (float): tick period T in ms; tick n closes at n*T
        spec (GridSpec): current partitioning
        controlled (iterable): player ids driven by a client, default all
        history (sequence): committed states ending with S_{n-1}
        mode (str): grid, dr_baseline or none
        window_end (float): override of the window close, used to reconcile

    Returns:
        TickResult with the committed S_n. Inputs for another tick or arriving
        after the window are discarded and counted as lost; controlled players
        without an on-time input get the predictor's position. predicted is set
        only when the predictor actually filled them in.
    """
    if period <= 0:
        raise ValueError('tick period must be positive')

    tick = state.index + 1
    if window_end is None:
        window_end = tick * period

    events = []
    lost = 0
    for arrival, packet in sorted(arrivals, key=lambda a: (a[0], a[1].sender, a[1].seq)):
        if packet.seq != tick or arrival > window_end:
            lost += 1
            log.debug('input %s from %s arrived at %s after window %s', packet.seq,
                      packet.sender, arrival, window_end)
            continue
        events.extend(packet.payload)

    controlled = set(state.player_ids if controlled is None else controlled)
    present = set(e.player_id for e in events)
    missing = tuple(sorted(controlled - present))

    committed = step(state, events, spec)
    predicted = False
    if missing:
        committed, predicted = _fill_missing(state, committed, missing, present & controlled,
                                             spec, history, mode, ball_guard)

    return TickResult(state=committed, predicted=predicted, missing=missing, lost=lost)


class Match(object):
    """One seeded match on a simulated network, with its lossless shadow."""

    def __init__(self, config, presets=None):
        self.config = config
        self.period = float(config.tick_ms)
        self.spec = config.grid_spec()
        self.latency = float(config.latency_ms)

        link = resolve_link(config.link, presets)
        server_link = resolve_link(config.server_link, presets) if config.server_link else None
        self.graph = build_topology(config.topology, config.clients, link, server_link)
        self.env = simpy.Environment()
        self.network = Network(self.env, self.graph, config.seed)
        self.authority = authority(self.graph)

        self.state = default_state(config)
        self.shadow = self.state
        self.committed = [self.state]
        self.truth = [self.state]
        self.owners = config.owners()
        self.controlled = tuple(sorted(k for ids in self.owners.values() for k in ids))
        self.script = build_script(config, self.state.player_ids)

        self.estimator = LatencyEstimator()
        self.records = []
        self.lost = 0

        self._buffers = {}
        self._arrived_at = {}
        self._tick_arrivals = {}
        self._late = defaultdict(list)
        self._predicted = {}
        self._authority_sent = defaultdict(dict)
        self._last_seen = {}
        self._relay_batches = defaultdict(list)
        self._messages_mark = 0
        self._drop_plan = self._plan_drops()

    def _plan_drops(self):
        """Decide every scripted and random input loss before the match starts."""
        config = self.config
        rng = derive_rng(config.seed, 'drops')
        targets = set(config.dropped_clients())
        plan = {}
        for tick in range(1, config.duration + 1):
            for client in range(config.clients):
                drop = client in targets and tick in config.drop_ticks
                if config.drop_probability > 0 and rng.random() < config.drop_probability:
                    drop = True
                if drop:
                    plan[(tick, client)] = 'drop'
                elif client in targets and tick in config.late_ticks:
                    plan[(tick, client)] = 'late'
        return plan

    # network plumbing

    def _echo(self, node):
        seen = self._last_seen.get(node)
        if seen is None:
            return None, 0.0
        seq, received_at = seen
        return seq, self.env.now - received_at

    def _sample_rtt(self, packet, arrival):
        if packet.echo_seq is None:
            return
        sent = self._authority_sent[packet.sender]
        sent_at = sent.get(packet.echo_seq)
        # updates older than the echoed one can no longer be sampled
        for seq in [s for s in sent if s < packet.echo_seq]:
            del sent[seq]
        if sent_at is None:
            return
        rtt = arrival - sent_at - packet.hold_ms
        if rtt >= 0:
            self.estimator.add_sample(rtt)

    def _on_input(self, packet, dst, arrival):
        """An input batch reached the authority."""
        self._sample_rtt(packet, arrival)
        tick = packet.seq
        if arrival > tick * self.period or tick <= self.state.index:
            self.lost += 1
            log.debug('late input %s from %s at %s', tick, packet.sender, arrival)
            if self.config.reconcile and arrival <= (tick + 1) * self.period:
                self._late[tick].append((arrival, packet))
            return

        buffer = self._buffers.setdefault(packet.sender, JitterBuffer())
        if buffer.add(packet):
            self._arrived_at[(packet.sender, packet.seq)] = arrival

    def _on_update(self, packet, dst, arrival):
        self._last_seen[dst] = (packet.seq, arrival)

    def _on_peer_input(self, packet, dst, arrival):
        # only the authority peer commits; other peers just receive the traffic
        pass

    def _on_relay_input(self, packet, dst, arrival):
        """An input batch reached the secondary server."""
        if arrival > self._relay_deadline(packet.seq):
            self.lost += 1
            log.debug('input %s from %s missed the relay at %s', packet.seq, packet.sender,
                      arrival)
            return
        self._relay_batches[packet.seq].append(packet)

    def _on_relay_update(self, packet, dst, arrival):
        """The secondary server fans a primary update out to its own clients."""
        self._last_seen[dst] = (packet.seq, arrival)
        state = decode_snapshot(packet.payload)
        for index, node in self._clients_of(SECONDARY_SERVER):
            scoped = scoped_state(state, keep=self.owners[index])
            self.network.transmit(Packet(seq=packet.seq, sent_at=self.env.now,
                                         sender=SECONDARY_SERVER,
                                         payload=encode_snapshot(scoped)),
                                  node, self._on_update)

    def _clients_of(self, server):
        return [(i, client_node(i)) for i in range(self.config.clients)
                if attached_server(self.graph, client_node(i)) == server]

    def _relay_deadline(self, tick):
        return (tick - 1) * self.period + self.period / 2.0

    # processes

    def _client(self, index):
        node = client_node(index)
        owned = self.owners[index]
        kind = self.graph.graph['kind']

        for tick in range(1, self.config.duration + 1):
            events = self.script.events(tick, owned, issued_at=self.env.now)
            echo_seq, hold = self._echo(node)
            packet = Packet(seq=tick, sent_at=self.env.now, sender=node, payload=events,
                            echo_seq=echo_seq, hold_ms=hold)
            fate = self._drop_plan.get((tick, index))

            if kind == P2P:
                self._send_peer(packet, node, tick, fate)
            else:
                server = attached_server(self.graph, node)
                if server == SECONDARY_SERVER:
                    late_at = self._relay_deadline(tick) + self.config.late_ms
                    deliver = self._on_relay_input
                else:
                    late_at = tick * self.period + self.config.late_ms
                    deliver = self._on_input
                self.network.transmit(packet, server, deliver, drop=fate == 'drop',
                                      arrive_at=late_at if fate == 'late' else None)

            yield self.env.timeout(self.period)

    def _send_peer(self, packet, node, tick, fate):
        for peer in sorted(self.graph.neighbors(node)):
            if peer == self.authority:
                late_at = tick * self.period + self.config.late_ms
                self.network.transmit(packet, peer, self._on_input, drop=fate == 'drop',
                                      arrive_at=late_at if fate == 'late' else None)
            elif node == self.authority:
                self._authority_sent[peer][tick] = self.env.now
                self.network.transmit(packet, peer, self._on_update)
            else:
                self.network.transmit(packet, peer, self._on_peer_input)

        if node == self.authority:
            # the authority peer's own input is local
            if fate == 'drop':
                self.lost += 1
            elif fate == 'late':
                self.env.process(self._late_local(packet, tick * self.period + self.config.late_ms))
            else:
                self._on_input(packet, node, self.env.now)

    def _late_local(self, packet, at):
        yield self.env.timeout(at - self.env.now)
        self._on_input(packet, packet.sender, self.env.now)

    def _relay(self):
        for tick in range(1, self.config.duration + 1):
            yield self.env.timeout(self._relay_deadline(tick) - self.env.now)
            batch = sorted(self._relay_batches.pop(tick, []), key=lambda p: p.sender)
            events = tuple(e for p in batch for e in p.payload)
            echo_seq, hold = self._echo(SECONDARY_SERVER)
            packet = Packet(seq=tick, sent_at=self.env.now, sender=SECONDARY_SERVER,
                            payload=events, echo_seq=echo_seq, hold_ms=hold)
            self.network.transmit(packet, self.authority, self._on_input)

    def _ticker(self):
        for tick in range(1, self.config.duration + 1):
            yield self.env.timeout(tick * self.period - self.env.now)
            # let arrivals stamped exactly at the boundary land first
            yield self.env.timeout(0)
            self._commit(tick)

    # commit

    def _adapt(self):
        """Feed the smoothed latency into the partitioner; True on re-partition."""
        if not self.config.adaptive or not self.estimator.ready:
            return False

        self.latency = self.estimator.estimate
        candidate = self.spec.with_latency(self.latency)
        if not needs_repartition(self.state.interval, candidate.interval):
            return False

        log.debug('re-partition: L=%.3f ms, I %s -> %s', self.latency, self.state.interval,
                  candidate.interval)
        self.spec = candidate
        self.state = resnap(self.state, candidate.interval, candidate)
        self.committed[-1] = self.state
        self.shadow = resnap(self.shadow, candidate.interval, candidate)
        self.truth[-1] = self.shadow
        return True

    def _reconcile(self, tick):
        """Recommit a predicted tick once its late inputs showed up."""
        late = self._late.pop(tick, [])
        if not late or not self._predicted.get(tick) or len(self.committed) < 2:
            return False

        history = self.committed[:-1]
        arrivals = self._tick_arrivals.get(tick, []) + late
        result = server_tick(history[-1], arrivals, self.period, self.spec, self.controlled,
                             history, self.config.predictor, self.config.ball_guard,
                             window_end=(tick + 1) * self.period)
        self.state = replace(result.state, rng_cursor=self.script.cursor(tick))
        self.committed[-1] = self.state
        log.debug('tick %s reconciled with %s late inputs', tick, len(late))
        return True

    def _commit(self, tick):
        now = self.env.now
        reconciled = self.config.reconcile and self._reconcile(tick - 1)
        repartitioned = self._adapt()

        arrivals = []
        for sender in sorted(self._buffers):
            for packet in self._buffers[sender].pop(now, tick_boundary=True, through=tick):
                arrivals.append((self._arrived_at.pop((sender, packet.seq)), packet))
        self._tick_arrivals[tick] = arrivals
        self._tick_arrivals.pop(tick - 2, None)

        result = server_tick(self.state, arrivals, self.period, self.spec, self.controlled,
                             self.committed, self.config.predictor, self.config.ball_guard)
        self.lost += result.lost
        self._predicted[tick] = result.predicted
        self._predicted.pop(tick - 2, None)

        previous = self.state
        self.state = replace(result.state, rng_cursor=self.script.cursor(tick))
        self.committed.append(self.state)

        inputs = self.script.events(tick, self.controlled, issued_at=now)
        self.shadow = replace(step(self.shadow, inputs, self.spec),
                              rng_cursor=self.script.cursor(tick))
        self.truth.append(self.shadow)

        self._send_updates(tick)

        error_mean, error_max = prediction_error(self.state, self.shadow, self.spec.i_y)
        self.records.append(MetricsRecord(
            tick=tick,
            latency_ms=self.latency,
            rho=compute_rho(self.spec.theta, self.spec.game_level, self.latency),
            interval=self.state.interval,
            predicted=result.predicted,
            error_mean=error_mean,
            error_max=error_max,
            unfrozen=sum(1 for p in self.state.players if not p.frozen),
            messages=self.network.sent - self._messages_mark,
            repartition=repartitioned,
            reconciled=bool(reconciled),
            ball_step=ball_step(previous, self.state),
            stalled=is_stalled(previous, self.state)))
        self._messages_mark = self.network.sent

    def _send_updates(self, tick):
        if self.graph.graph['kind'] == P2P:
            return

        now = self.env.now
        for index, node in self._clients_of(self.authority):
            scoped = scoped_state(self.state, keep=self.owners[index])
            self._authority_sent[node][tick] = now
            self.network.transmit(Packet(seq=tick, sent_at=now, sender=self.authority,
                                         payload=encode_snapshot(scoped)),
                                  node, self._on_update)

        if self.graph.graph['kind'] == NETWORK_SERVER:
            keep = [k for index, _ in self._clients_of(SECONDARY_SERVER)
                    for k in self.owners[index]]
            self._authority_sent[SECONDARY_SERVER][tick] = now
            self.network.transmit(Packet(seq=tick, sent_at=now, sender=self.authority,
                                         payload=encode_snapshot(scoped_state(self.state, keep))),
                                  SECONDARY_SERVER, self._on_relay_update)

    def run(self):
        """Play the whole match; returns the per-tick metrics records."""
        for index in range(self.config.clients):
            self.env.process(self._client(index))
        if self.graph.graph['kind'] == NETWORK_SERVER:
            self.env.process(self._relay())

        ticker = self.env.process(self._ticker())
        self.env.run(until=ticker)
        self.env.run()
        return self.records
