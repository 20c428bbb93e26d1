"""
Anonymous channel decision logic.

Every function here is a step of one peer: it sees the message it holds, the
roster view and its own state, never the hop path or the originator. The
simulator calls these inside ``peer_logic()`` so any read of private path
bookkeeping raises AnonymityViolationError.
"""

from collections.abc import Callable, Collection, Mapping, Sequence
from typing import Any

import numpy as np

from coutile.core.crypto import CryptoSuite
from coutile.exceptions import (
    CodecError,
    ConfigurationError,
    DecryptionError,
    MalformedSpecError,
    NoForwardeeError,
)
from coutile.models.channel import (
    ChannelMessage,
    ForwardAction,
    PendingComputation,
    ReverseAction,
    RewardReceipt,
    RosterView,
    TraceRecord,
    WorkerReply,
    WorkerState,
    peer_logic,
)
from coutile.models.computation import ComputationSpec, JointInput
from coutile.models.crypto import KeyPair, Signature, SymKey
from coutile.models.enums import (
    ChannelEvent,
    ForwardActionKind,
    ForwardeeDecision,
    ReverseActionKind,
)
from coutile.models.identity import Pseudonym
from coutile.models.reputation import LocalOpinionLedger
from coutile.services.computations import decode_spec, encode_spec
from coutile.services.reputation import record_reward
from coutile.utils.codec import Value, decode_value, encode_value
from coutile.utils.logger import logger

__all__ = [
    "NONCE_SIZE",
    "acknowledge_reward",
    "audit_trace",
    "c_fwd_step",
    "c_rev_step",
    "c_worker_receive",
    "commit_reward",
    "decode_comp",
    "decode_input",
    "encode_comp",
    "encode_input",
    "forwardee_decision",
    "hbc_fwd_step",
    "hbc_worker_receive",
    "peer_logic",
    "relay_commitment",
    "rev_step",
    "reward_first_forwardee",
    "select_forwardee",
    "verify_receipt",
]

NONCE_SIZE = 16
TOLERANCE = 1e-12

_COMP_NIL = b"\x00"
_COMP_SPEC = b"\x01"

Compute = Callable[[ComputationSpec, JointInput], Value]


def encode_comp(spec: ComputationSpec | None) -> bytes:
    """Plaintext of Ecomp: the nil marker for input deliveries, else the encoded spec."""
    return _COMP_NIL if spec is None else _COMP_SPEC + encode_spec(spec)


def decode_comp(data: bytes) -> ComputationSpec | None:
    """
    Inverse of encode_comp.

    Raises:
        MalformedSpecError: for an unknown marker or undecodable bytes.
    """
    if data == _COMP_NIL:
        return None
    if data[:1] != _COMP_SPEC:
        raise MalformedSpecError("Ecomp carries no computation")
    return decode_spec(data[1:])


def encode_input(value: Value, nonce: bytes) -> bytes:
    """Plaintext of an input message: ``nonce ∥ encode(value)``."""
    return nonce + encode_value(value)


def decode_input(data: bytes) -> tuple[Value, bytes]:
    if len(data) <= NONCE_SIZE:
        raise CodecError("Input message too short")
    return decode_value(data[NONCE_SIZE:]), data[:NONCE_SIZE]


def _draw_excluding(
    size: int, excluded: Collection[int], rng: np.random.Generator
) -> int:
    while True:
        candidate = int(rng.integers(size))
        if candidate not in excluded:
            return candidate


def hbc_fwd_step(
    holder: Pseudonym,
    message: ChannelMessage,
    is_originator: bool,
    p: float,
    roster: RosterView,
    rng: np.random.Generator,
) -> ForwardAction:
    """
    Random hopping: the originator always hops, any other holder hops with
    probability ``p`` and otherwise submits to the destination.

    Hop targets are uniform over the roster minus the holder and the destination.
    """
    if not (is_originator or rng.random() < p):
        return ForwardAction(kind=ForwardActionKind.SUBMIT, target=message.dest)
    excluded = {roster.position(holder), roster.position(message.dest)}
    if len(roster) <= len(excluded):
        return ForwardAction(
            kind=ForwardActionKind.SUBMIT, target=message.dest, degraded=True
        )
    target = _draw_excluding(len(roster), excluded, rng)
    return ForwardAction(kind=ForwardActionKind.HOP, target=roster.pseudonyms[target])


def select_forwardee(
    g_s: float,
    g_d: float,
    delta: float,
    roster: RosterView,
    rng: np.random.Generator,
    exclude: Collection[Pseudonym] = (),
) -> Pseudonym:
    """
    Choose the next forwardee by reputation.

    If ``g_s ≥ g_d - δ`` the forwardee is uniform among peers whose reputation
    lies in ``[g_d - δ, g_s + δ]``; otherwise it is the peer with the highest
    reputation not above ``g_s + δ`` (exact ties broken at random). Peers in
    ``exclude`` are never chosen.

    Raises:
        NoForwardeeError: if no peer qualifies.
    """
    reps = roster.reputations
    allowed = np.ones(len(roster), dtype=bool)
    for peer in exclude:
        allowed[roster.position(peer)] = False
    upper = g_s + delta
    eligible = allowed & (reps <= upper + TOLERANCE)
    if g_s >= g_d - delta - TOLERANCE:
        lower = g_d - delta
        candidates = np.flatnonzero(eligible & (reps >= lower - TOLERANCE))
        if candidates.size == 0:
            raise NoForwardeeError(lower, upper)
        return roster.pseudonyms[int(rng.choice(candidates))]
    if not eligible.any():
        raise NoForwardeeError(None, upper)
    best = reps[eligible].max()
    ties = np.flatnonzero(eligible & (reps >= best - TOLERANCE))
    return roster.pseudonyms[int(rng.choice(ties))]


def forwardee_decision(
    sender_rep: float, receiver_rep: float, delta: float
) -> ForwardeeDecision:
    """A forwardee accepts iff the sender's reputation is at least its own minus δ."""
    if sender_rep >= receiver_rep - delta - TOLERANCE:
        return ForwardeeDecision.ACCEPT
    return ForwardeeDecision.DISCARD


def c_fwd_step(
    holder: Pseudonym,
    message: ChannelMessage,
    is_originator: bool,
    p: float,
    delta: float,
    roster: RosterView,
    rng: np.random.Generator,
    sender_rep: float | None = None,
) -> ForwardAction:
    """
    Co-utile forwarding step.

    A non-originator first applies the δ acceptance rule against the peer it
    received the message from. It then hops with probability ``p`` (the
    originator always hops) to a forwardee picked by select_forwardee. Without
    any eligible forwardee a forwardee submits directly, while an originator
    hops to a uniformly random peer so it never reaches the worker itself;
    both fallbacks are flagged as degraded.
    """
    own_rep = roster.reputation_of(holder)
    if (
        not is_originator
        and sender_rep is not None
        and forwardee_decision(sender_rep, own_rep, delta) is ForwardeeDecision.DISCARD
    ):
        return ForwardAction(kind=ForwardActionKind.DISCARD)
    if not (is_originator or rng.random() < p):
        return ForwardAction(kind=ForwardActionKind.SUBMIT, target=message.dest)
    try:
        target = select_forwardee(
            own_rep,
            roster.reputation_of(message.dest),
            delta,
            roster,
            rng,
            exclude=(holder, message.dest),
        )
    except NoForwardeeError as exc:
        logger.debug(f"{exc}; degrading to reputation-blind forwarding")
        if is_originator:
            fallback = hbc_fwd_step(holder, message, True, p, roster, rng)
            return fallback.model_copy(update={"degraded": True})
        return ForwardAction(
            kind=ForwardActionKind.SUBMIT, target=message.dest, degraded=True
        )
    return ForwardAction(kind=ForwardActionKind.HOP, target=target)


def _open(
    state: WorkerState, message: ChannelMessage, suite: CryptoSuite
) -> tuple[ComputationSpec | None, bytes] | None:
    try:
        comp = decode_comp(suite.pke_decrypt(state.keypair.secret_key, message.ecomp))
        payload = suite.pke_decrypt(state.keypair.secret_key, message.msg)
    except (DecryptionError, MalformedSpecError) as exc:
        logger.debug(f"Worker dropped unreadable message: {exc}")
        return None
    return comp, payload


def _flush(
    state: WorkerState, suite: CryptoSuite, compute: Compute
) -> list[WorkerReply]:
    joint = state.buffer.joint_input()
    if joint is None or not state.pending:
        return []
    replies = []
    for pending in state.pending:
        output = compute(pending.spec, joint)
        replies.append(
            WorkerReply(
                ticket=pending.ticket,
                payload=suite.sym_encrypt(pending.key, encode_value(output)),
                output=output,
            )
        )
    state.buffer.clear()
    state.pending.clear()
    return replies


def _accept(
    state: WorkerState,
    comp: ComputationSpec | None,
    payload: bytes,
    ticket: int,
) -> None:
    if comp is None:
        try:
            value, nonce = decode_input(payload)
        except CodecError as exc:
            logger.debug(f"Worker dropped malformed input: {exc}")
            return
        state.buffer.add(value, nonce)
    else:
        state.pending.append(
            PendingComputation(ticket=ticket, key=SymKey(key=payload), spec=comp)
        )


def _check_capacity(state: WorkerState, m_clients: int) -> None:
    if state.buffer.capacity != m_clients:
        raise ConfigurationError(
            f"worker buffer holds {state.buffer.capacity} inputs, "
            f"session has {m_clients}",
            "clients",
        )


def hbc_worker_receive(
    state: WorkerState,
    message: ChannelMessage,
    m_clients: int,
    suite: CryptoSuite,
    compute: Compute,
    ticket: int,
) -> list[WorkerReply]:
    """
    Worker side of the honest-but-curious channel.

    Input messages fill the buffer; a computation waits in ``state.pending``
    until ``m_clients`` distinct inputs are present, then every pending
    computation is evaluated and answered with E_K(out).

    Returns:
        list[WorkerReply]: replies released by this message, possibly for
        computations that arrived earlier.
    """
    _check_capacity(state, m_clients)
    opened = _open(state, message, suite)
    if opened is None:
        return []
    comp, payload = opened
    if comp is not None and len(payload) != 32:
        logger.debug("Worker dropped a dispatch without a valid key")
        return []
    _accept(state, comp, payload, ticket)
    return _flush(state, suite, compute)


def c_worker_receive(
    state: WorkerState,
    message: ChannelMessage,
    m_clients: int,
    delta: float,
    submitter_rep: float,
    own_rep: float,
    suite: CryptoSuite,
    compute: Compute,
    ticket: int,
) -> list[WorkerReply]:
    """
    Co-utile worker: like hbc_worker_receive, except that a computation
    submitted by a peer whose reputation is below ``own_rep - δ`` is refused
    with an immediate E_K(nil). Input deliveries are never refused.
    """
    _check_capacity(state, m_clients)
    opened = _open(state, message, suite)
    if opened is None:
        return []
    comp, payload = opened
    if comp is not None and submitter_rep < own_rep - delta - TOLERANCE:
        if len(payload) != 32:
            return []
        key = SymKey(key=payload)
        return [
            WorkerReply(
                ticket=ticket,
                payload=suite.sym_encrypt(key, encode_value(None)),
                refused=True,
            )
        ]
    return hbc_worker_receive(state, message, m_clients, suite, compute, ticket)


def rev_step(
    holder_keys: Sequence[tuple[int, SymKey]],
    payload: bytes,
    previous_hop: Pseudonym | None,
    suite: CryptoSuite,
) -> ReverseAction:
    """
    One reverse-path step.

    The holder tries every key it issued; the one that opens the payload
    terminates the path. Otherwise the payload goes back to the peer the
    forward message came from. A holder with no previous hop that cannot
    decrypt records a delivery failure.
    """
    for slot, key in holder_keys:
        try:
            plaintext = suite.sym_decrypt(key, payload)
        except DecryptionError:
            continue
        return ReverseAction(
            kind=ReverseActionKind.DELIVER, slot=slot, plaintext=plaintext
        )
    if previous_hop is None:
        return ReverseAction(kind=ReverseActionKind.FAIL)
    return ReverseAction(kind=ReverseActionKind.BACKTRACK, target=previous_hop)


def c_rev_step(
    holder_keys: Sequence[tuple[int, SymKey]],
    payload: bytes,
    previous_hop: Pseudonym | None,
    suite: CryptoSuite,
    reward: Callable[[int], RewardReceipt | None],
) -> ReverseAction:
    """rev_step followed, on delivery, by the first-forwardee reward handshake."""
    action = rev_step(holder_keys, payload, previous_hop, suite)
    if action.kind is not ReverseActionKind.DELIVER or action.slot is None:
        return action
    return action.model_copy(update={"receipt": reward(action.slot)})


def commitment_message(client: Pseudonym, forwardee: Pseudonym, tag: bytes) -> bytes:
    return b"coutile/reward-commitment|" + client.value + forwardee.value + tag


def acknowledgment_message(commitment: Signature) -> bytes:
    return b"coutile/reward-ack|" + commitment.signer.value + commitment.sig


def commit_reward(
    client: Pseudonym,
    client_keys: KeyPair,
    forwardee: Pseudonym,
    tag: bytes,
    suite: CryptoSuite,
) -> Signature:
    """The client's signed statement that it has set ℓ(client, forwardee) = 1."""
    return Signature(
        signer=client,
        sig=suite.sign(
            client_keys.secret_key, commitment_message(client, forwardee, tag)
        ),
    )


def relay_commitment(
    commitment: Signature,
    client: int,
    client_public_key: bytes,
    forwardee: int,
    forwardee_pseudonym: Pseudonym,
    tag: bytes,
    managers: Sequence[int],
    ledger: LocalOpinionLedger,
    suite: CryptoSuite,
) -> bool:
    """
    The first forwardee hands the commitment to the client's managers.

    Signature verification is deterministic and every manager checks the same
    bytes under the same key, so their verdicts coincide; this step verifies
    once on behalf of all of them and is therefore centralized. When the
    signature holds, the client's opinion of the forwardee is incremented
    once. Forged commitments change nothing.
    """
    message = commitment_message(commitment.signer, forwardee_pseudonym, tag)
    if not suite.verify(client_public_key, message, commitment.sig):
        logger.warning(
            f"{len(managers)} managers rejected a reward commitment of client {client}"
        )
        return False
    record_reward(ledger, client, forwardee)
    return True


def acknowledge_reward(
    forwardee: Pseudonym,
    forwardee_keys: KeyPair,
    commitment: Signature,
    suite: CryptoSuite,
) -> Signature:
    return Signature(
        signer=forwardee,
        sig=suite.sign(forwardee_keys.secret_key, acknowledgment_message(commitment)),
    )


def verify_receipt(
    receipt: RewardReceipt,
    client: Pseudonym,
    client_public_key: bytes,
    forwardee: Pseudonym,
    forwardee_public_key: bytes,
    tag: bytes,
    suite: CryptoSuite,
) -> bool:
    """Both signatures verify against the named pseudonyms and the exact messages."""
    commitment, acknowledgment = receipt.commitment, receipt.acknowledgment
    return (
        receipt.tag == tag
        and receipt.forwardee == forwardee
        and commitment.signer == client
        and acknowledgment.signer == forwardee
        and suite.verify(
            client_public_key,
            commitment_message(client, forwardee, tag),
            commitment.sig,
        )
        and suite.verify(
            forwardee_public_key, acknowledgment_message(commitment), acknowledgment.sig
        )
    )


def reward_first_forwardee(
    client: int,
    forwardee: int,
    tag: bytes,
    pseudonyms: Sequence[Pseudonym],
    keys: Mapping[int, KeyPair],
    managers: Sequence[int],
    ledger: LocalOpinionLedger,
    suite: CryptoSuite,
) -> RewardReceipt | None:
    """
    Full honest handshake: commit, relay to the managers, acknowledge.

    Returns:
        RewardReceipt | None: the receipt the client keeps for the manager
        audit, or None when the managers rejected the commitment.
    """
    client_p, forwardee_p = pseudonyms[client], pseudonyms[forwardee]
    commitment = commit_reward(client_p, keys[client], forwardee_p, tag, suite)
    if not relay_commitment(
        commitment,
        client,
        keys[client].public_key,
        forwardee,
        forwardee_p,
        tag,
        managers,
        ledger,
        suite,
    ):
        return None
    return RewardReceipt(
        tag=tag,
        forwardee=forwardee_p,
        commitment=commitment,
        acknowledgment=acknowledge_reward(
            forwardee_p, keys[forwardee], commitment, suite
        ),
    )


def audit_trace(
    records: Sequence[TraceRecord], originators: Mapping[int, Pseudonym]
) -> list[TraceRecord]:
    """
    Records that name the originator of their message in a peer-visible origin role.

    A record violates anonymity when its destination is the originator, or
    when it shows the originator as the carrier of the first hop, i.e. as the
    sender of a message it originated.
    """
    violations = []
    for record in records:
        origin = originators.get(record.message_id)
        if origin is None:
            continue
        if record.dest == origin:
            violations.append(record)
        elif record.carrier == origin and record.hop_index == 0:
            violations.append(record)
    if violations:
        logger.warning(f"Trace audit found {len(violations)} anonymity violations")
    return violations


def trace_event(
    iteration: int,
    event: ChannelEvent,
    carrier: Pseudonym,
    dest: Pseudonym,
    hop_index: int,
    message_id: int,
) -> TraceRecord:
    return TraceRecord(
        iteration=iteration,
        event=event,
        carrier=carrier,
        dest=dest,
        hop_index=hop_index,
        message_id=message_id,
    )


def unpack_output(plaintext: bytes | None) -> Any:
    """Decoded output value, or None for a missing or undecodable plaintext."""
    if plaintext is None:
        return None
    try:
        return decode_value(plaintext)
    except CodecError:
        return None
