"""
Session runtime.

Moves channel messages between peers on the world's event queue: every
transfer takes one time unit, and each peer's decision runs inside
``peer_logic()`` through the functions of ``coutile.services.channel``. This
module owns everything peers must not see: hop paths, originators and the
bookkeeping that turns protocol outcomes into counters.
"""

from collections import defaultdict
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import NamedTuple

from coutile.exceptions import EvaluationError
from coutile.models.channel import (
    ChannelCounters,
    ChannelMessage,
    ForwardAction,
    HopPath,
    InputBuffer,
    ReverseAction,
    RewardReceipt,
    WorkerReply,
    WorkerState,
    peer_logic,
)
from coutile.models.computation import ComputationSpec, JointInput
from coutile.models.crypto import SymKey
from coutile.models.enums import (
    ChannelEvent,
    ForwardActionKind,
    MessageKind,
    Mode,
    ReverseActionKind,
)
from coutile.models.identity import Pseudonym
from coutile.models.session import BulletinPost, DispatchRecord, Session
from coutile.models.world import World
from coutile.services.channel import (
    NONCE_SIZE,
    c_fwd_step,
    c_rev_step,
    c_worker_receive,
    encode_comp,
    encode_input,
    hbc_fwd_step,
    hbc_worker_receive,
    rev_step,
    reward_first_forwardee,
    trace_event,
    unpack_output,
)
from coutile.utils.codec import Value
from coutile.utils.logger import logger

Behaviour = Callable[[int, ComputationSpec, JointInput], Value]

_RANDOMNESS = 32


class Transfer(str, Enum):
    FORWARD = "forward"
    SUBMIT = "submit"
    REVERSE = "reverse"


class Delivery(NamedTuple):
    message_id: int
    receiver: int
    sender: int
    position: int = 0


@dataclass(slots=True)
class Envelope:
    message_id: int
    kind: MessageKind
    message: ChannelMessage
    path: HopPath
    dest: int
    dispatch: DispatchRecord | None = None
    hops: int = 0
    reply: bytes = b""


class SessionNetwork:
    """
    One session's traffic: input broadcast, dispatches and reverse delivery.

    Rational mode uses the co-utile channel steps; hbc and baseline modes use
    plain random hopping with no acceptance rule, refusal or reward.
    """

    def __init__(
        self, world: World, session: Session, mode: Mode, behaviour: Behaviour
    ):
        self.world = world
        self.config = world.config
        self.session = session
        self.mode = mode
        self.behaviour = behaviour
        self.rng = world.rng
        self.suite = world.suite
        self.roster = world.roster_view()
        self.queue = world.queue
        self.queue.reset()
        self.counters = ChannelCounters()
        self.bulletin: list[BulletinPost] = []
        self.dispatches: dict[int, list[DispatchRecord]] = {
            client: [] for client in session.clients
        }
        self._records: dict[int, DispatchRecord] = {}
        self._envelopes: dict[int, Envelope] = {}
        self._workers: dict[int, WorkerState] = {}
        self._issued_keys: dict[int, list[tuple[int, SymKey]]] = defaultdict(list)
        self._m = len(session.clients)

    @property
    def rational(self) -> bool:
        return self.mode is Mode.RATIONAL

    def pseudonym(self, peer: int) -> Pseudonym:
        return self.roster.pseudonyms[peer]

    def run(
        self,
        slates: Mapping[int, Sequence[int]],
        computations: Mapping[int, ComputationSpec],
    ) -> None:
        """Broadcast all inputs, dispatch every computation, then drain the queue."""
        for client, value in zip(self.session.clients, self.session.inputs):
            nonce = self.rng.bytes(NONCE_SIZE)
            self._worker(client).buffer.add(value, nonce)
            for peer in range(self.world.size):
                if peer != client:
                    self._launch_input(client, peer, value, nonce)
        for client in self.session.clients:
            for worker in slates[client]:
                self._launch_dispatch(client, worker, computations[client])
        while self.queue:
            event = self.queue.pop()
            self._handle(event.kind, event.payload)
        self._close()

    def returned_outputs(self, client: int) -> list[Value]:
        return [
            record.output if record.returned else None
            for record in self.dispatches[client]
        ]

    def _worker(self, peer: int) -> WorkerState:
        if peer not in self._workers:
            self._workers[peer] = WorkerState(
                keypair=self.world.keys[peer], buffer=InputBuffer(capacity=self._m)
            )
        return self._workers[peer]

    def _encrypt(self, peer: int, plaintext: bytes) -> bytes:
        return self.suite.pke_encrypt(
            self.world.keys[peer].public_key, plaintext, self.rng.bytes(_RANDOMNESS)
        )

    def _launch_input(self, client: int, dest: int, value: Value, nonce: bytes) -> None:
        message = ChannelMessage(
            msg=self._encrypt(dest, encode_input(value, nonce)),
            ecomp=self._encrypt(dest, encode_comp(None)),
            dest=self.pseudonym(dest),
            carrier=self.pseudonym(client),
        )
        self._launch(client, dest, MessageKind.INPUT, message, None)

    def _launch_dispatch(
        self, client: int, worker: int, spec: ComputationSpec
    ) -> None:
        key = SymKey(key=self.rng.bytes(32))
        message = ChannelMessage(
            msg=self._encrypt(worker, key.key),
            ecomp=self._encrypt(worker, encode_comp(spec)),
            dest=self.pseudonym(worker),
            carrier=self.pseudonym(client),
        )
        record = DispatchRecord(
            client=client,
            worker=worker,
            ticket=self.world.allocate_message_id(),
            key=key,
            tag=self.rng.bytes(16),
        )
        self.dispatches[client].append(record)
        self._records[record.ticket] = record
        self._issued_keys[client].append((record.ticket, key))
        self._launch(client, worker, MessageKind.DISPATCH, message, record)

    def _launch(
        self,
        originator: int,
        dest: int,
        kind: MessageKind,
        message: ChannelMessage,
        record: DispatchRecord | None,
    ) -> None:
        message_id = record.ticket if record else self.world.allocate_message_id()
        envelope = Envelope(
            message_id, kind, message, HopPath(originator), dest, record
        )
        self._envelopes[message_id] = envelope
        self.counters.messages += 1
        if self.config.trace:
            self.world.trace_origins[message_id] = self.pseudonym(originator)
        self._advance(envelope, originator, None)

    def _handle(self, kind: Transfer, delivery: Delivery) -> None:
        envelope = self._envelopes[delivery.message_id]
        match kind:
            case Transfer.FORWARD:
                self._advance(envelope, delivery.receiver, delivery.sender)
            case Transfer.SUBMIT:
                self._submit(envelope, delivery.receiver, delivery.sender)
            case Transfer.REVERSE:
                self._backtrack(envelope, delivery)

    def _drops(self, peer: int) -> bool:
        return self.config.malicious_forwarding and self.world.peers[peer].malicious

    def _decide_forward(
        self, holder: int, message: ChannelMessage, sender: int | None
    ) -> ForwardAction:
        is_originator = sender is None
        with peer_logic():
            if self.rational:
                return c_fwd_step(
                    self.pseudonym(holder),
                    message,
                    is_originator,
                    self.config.p_forward,
                    self.config.delta,
                    self.roster,
                    self.rng,
                    sender_rep=None
                    if sender is None
                    else float(self.roster.reputations[sender]),
                )
            return hbc_fwd_step(
                self.pseudonym(holder),
                message,
                is_originator,
                self.config.p_forward,
                self.roster,
                self.rng,
            )

    def _advance(self, envelope: Envelope, holder: int, sender: int | None) -> None:
        if sender is not None and self._drops(holder):
            self.counters.drops += 1
            self._trace(ChannelEvent.DISCARD, envelope, holder, envelope.hops)
            return
        if sender is not None and envelope.hops >= self.config.max_hops:
            action = ForwardAction(
                kind=ForwardActionKind.SUBMIT,
                target=envelope.message.dest,
                hop_cap=True,
            )
        else:
            action = self._decide_forward(holder, envelope.message, sender)
        if action.degraded:
            self.counters.degraded += 1
        match action.kind:
            case ForwardActionKind.DISCARD:
                self.counters.discards += 1
                self._trace(ChannelEvent.DISCARD, envelope, holder, envelope.hops)
            case ForwardActionKind.HOP:
                target = self.roster.position(action.target)
                if sender is None and envelope.dispatch is not None:
                    envelope.dispatch.first_hop = target
                envelope.path.append(target)
                envelope.hops += 1
                envelope.message = envelope.message.model_copy(
                    update={"carrier": action.target}
                )
                self.counters.hops += 1
                self._trace(ChannelEvent.HOP, envelope, target, envelope.hops)
                self.queue.schedule(
                    1, Transfer.FORWARD, Delivery(envelope.message_id, target, holder)
                )
            case ForwardActionKind.SUBMIT:
                if action.hop_cap:
                    self.counters.hop_cap_hits += 1
                self.counters.submitter_positions[envelope.hops] += 1
                self._trace(ChannelEvent.SUBMIT, envelope, holder, envelope.hops)
                self.queue.schedule(
                    1,
                    Transfer.SUBMIT,
                    Delivery(envelope.message_id, envelope.dest, holder),
                )

    def _compute(self, worker: int, spec: ComputationSpec, joint: JointInput) -> Value:
        try:
            return self.behaviour(worker, spec, joint)
        except EvaluationError as exc:
            logger.debug(f"Worker could not evaluate: {exc}")
            return None

    def _submit(self, envelope: Envelope, worker: int, submitter: int) -> None:
        state = self._worker(worker)
        compute = partial(self._compute, worker)
        with peer_logic():
            if self.rational:
                replies = c_worker_receive(
                    state,
                    envelope.message,
                    self._m,
                    self.config.delta,
                    float(self.roster.reputations[submitter]),
                    float(self.roster.reputations[worker]),
                    self.suite,
                    compute,
                    envelope.message_id,
                )
            else:
                replies = hbc_worker_receive(
                    state,
                    envelope.message,
                    self._m,
                    self.suite,
                    compute,
                    envelope.message_id,
                )
        for reply in replies:
            self._respond(worker, reply)

    def _respond(self, worker: int, reply: WorkerReply) -> None:
        envelope = self._envelopes[reply.ticket]
        record = envelope.dispatch
        position = len(envelope.path)
        if reply.refused:
            self.counters.refusals += 1
            record.refused = True
            self._trace(ChannelEvent.REFUSE, envelope, worker, position)
        if self.config.publish_output:
            if not reply.refused:
                self.bulletin.append(BulletinPost(worker=worker, output=reply.output))
            record.returned = True
            record.output = reply.output
            self._trace(ChannelEvent.PUBLISH, envelope, worker, position)
            return
        envelope.reply = reply.payload
        self._send_back(envelope, position - 1, worker, position)

    def _send_back(
        self, envelope: Envelope, position: int, sender: int, sender_position: int
    ) -> None:
        self._trace(ChannelEvent.BACKTRACK, envelope, sender, sender_position)
        self.queue.schedule(
            1,
            Transfer.REVERSE,
            Delivery(envelope.message_id, envelope.path.at(position), sender, position),
        )

    def _reward(self, client: int, slot: int) -> RewardReceipt | None:
        record = self._records[slot]
        peer = self.world.peers[client]
        if record.first_hop is None or peer.non_rewarding:
            return None
        receipt = reward_first_forwardee(
            client,
            record.first_hop,
            record.tag,
            self.world.pseudonyms,
            self.world.keys,
            peer.managers,
            self.world.ledger,
            self.suite,
        )
        if receipt is not None:
            self.counters.receipts += 1
        return receipt

    def _decide_reverse(
        self, holder: int, payload: bytes, previous: Pseudonym | None
    ) -> ReverseAction:
        keys = self._issued_keys.get(holder, [])
        with peer_logic():
            if self.rational:
                return c_rev_step(
                    keys, payload, previous, self.suite, partial(self._reward, holder)
                )
            return rev_step(keys, payload, previous, self.suite)

    def _backtrack(self, envelope: Envelope, delivery: Delivery) -> None:
        holder, position = delivery.receiver, delivery.position
        previous = (
            self.pseudonym(envelope.path.at(position - 1)) if position > 0 else None
        )
        action = self._decide_reverse(holder, envelope.reply, previous)
        record = envelope.dispatch
        match action.kind:
            case ReverseActionKind.DELIVER:
                delivered = self._records[action.slot]
                self._trace(
                    ChannelEvent.DELIVER, envelope, delivery.sender, position + 1
                )
                delivered.returned = True
                delivered.completed_reverse = True
                delivered.output = unpack_output(action.plaintext)
                delivered.receipt = action.receipt
            case ReverseActionKind.BACKTRACK:
                if self._drops(holder):
                    self.counters.drops += 1
                    return
                self._send_back(envelope, position - 1, holder, position)
            case ReverseActionKind.FAIL:
                self.counters.delivery_failures += 1
                record.failed = True
                logger.debug(f"Reverse path of message {envelope.message_id} broke")

    def _close(self) -> None:
        for records in self.dispatches.values():
            for record in records:
                if not record.returned and not record.failed:
                    self.counters.timeouts += 1

    def _trace(
        self, event: ChannelEvent, envelope: Envelope, carrier: int, hop_index: int
    ) -> None:
        if not self.config.trace:
            return
        self.world.trace.append(
            trace_event(
                self.world.iteration,
                event,
                self.pseudonym(carrier),
                envelope.message.dest,
                hop_index,
                envelope.message_id,
            )
        )
