"""
Joint-computation orchestration.

A session runs in one of three modes:

- ``hbc``: one uniformly chosen worker per client, plain random hopping, no
  reputation reads or writes.
- ``rational``: r workers drawn from the κ_i peers closest in reputation
  inside the band [g_i - band_below·δ, g_i + band_above·δ], co-utile
  channel steps, reward settlement and the manager receipt audit.
- ``baseline``: r uniformly chosen workers, plain random hopping, no
  reputation at all.
"""

from collections import Counter
from collections.abc import Mapping, Sequence

import numpy as np

from coutile.core.crypto import CryptoSuite
from coutile.exceptions import ConfigurationError
from coutile.models.computation import ComputationSpec, JointInput
from coutile.models.enums import Mode, PunishmentRule
from coutile.models.reputation import LocalOpinionLedger
from coutile.models.session import DispatchRecord, Session, SessionResult, WorkerSlate
from coutile.models.world import PeerRecord, World
from coutile.services.channel import verify_receipt
from coutile.services.computations import evaluate, get_definition
from coutile.services.network import Behaviour, SessionNetwork
from coutile.services.reputation import record_punishment, record_reward
from coutile.utils.codec import Value, decode_value, encode_value, same_value
from coutile.utils.logger import logger

_BAND_TOLERANCE = 1e-12


def prune_computation(
    spec: ComputationSpec, inputs: Sequence[Value], i: int
) -> ComputationSpec:
    """
    The part C_i of C that yields client i's output.

    Computations that must know which input is the client's get ``inputs[i]``
    embedded; the others are the same for every client.
    """
    if not get_definition(spec).embeds_own_input:
        return spec
    return spec.model_copy(update={"embedded_input": inputs[i]})


def sample_kappa(
    redundancy: int,
    kappa_max: int,
    peers: int,
    rng: np.random.Generator,
    kappa_min: int | None = None,
) -> int:
    """
    κ_i uniform in [κ_min, min(κ_max, n - 1)].

    ``kappa_min`` defaults to r + 1 and is clipped to the upper bound, so a
    small roster or a low κ_max narrows the range instead of emptying it.
    """
    upper = min(kappa_max, peers - 1)
    if upper <= redundancy:
        raise ConfigurationError(
            "kappa_max and peers (n) leave no κ > redundancy (r)", "kappa_max"
        )
    lower = redundancy + 1 if kappa_min is None else max(redundancy + 1, kappa_min)
    return int(rng.integers(min(lower, upper), upper + 1))


def select_workers(
    g_i: float,
    kappa: int,
    redundancy: int,
    reputations: np.ndarray,
    rng: np.random.Generator,
    self_index: int,
    *,
    floor: float | None = None,
    ceiling: float | None = None,
) -> tuple[int, ...]:
    """
    Draw r distinct workers among the κ peers closest in reputation to ``g_i``.

    Distance ties are resolved by roster order, so the candidate set is a pure
    function of the reputations; only the final draw uses ``rng``.

    ``ceiling`` and ``floor`` narrow the candidates to peers whose reputation
    lies within them before the κ closest are taken. A bound that would leave
    r or fewer candidates is ignored.

    Raises:
        ConfigurationError: if κ ≤ r or the roster cannot supply κ candidates.
    """
    if kappa <= redundancy:
        raise ConfigurationError("κ must be > redundancy (r)", "kappa_max")
    n = len(reputations)
    if n < kappa + 1:
        raise ConfigurationError(
            f"a roster of {n} peers cannot supply κ={kappa} candidates", "peers"
        )
    reputations = np.asarray(reputations, dtype=float)
    distance = np.abs(reputations - g_i)
    order = np.lexsort((np.arange(n), distance))
    pool = order[order != self_index]
    if ceiling is not None:
        within = pool[reputations[pool] <= ceiling + _BAND_TOLERANCE]
        if len(within) > redundancy:
            pool = within
    if floor is not None:
        within = pool[reputations[pool] >= floor - _BAND_TOLERANCE]
        if len(within) > redundancy:
            pool = within
    candidates = pool[:kappa]
    chosen = rng.choice(candidates, size=redundancy, replace=False)
    return tuple(int(worker) for worker in chosen)


def select_uniform_workers(
    client: int, redundancy: int, peers: int, rng: np.random.Generator
) -> tuple[int, ...]:
    """Reputation-blind worker choice used by the hbc and baseline modes."""
    if redundancy > peers - 1:
        raise ConfigurationError(
            "peers (n) must exceed redundancy (r) + 1", "redundancy"
        )
    others = np.array([peer for peer in range(peers) if peer != client])
    chosen = rng.choice(others, size=redundancy, replace=False)
    return tuple(int(worker) for worker in chosen)


def majority_output(outputs: Sequence[Value]) -> Value:
    """
    Most frequent non-nil output.

    Ties go to the value with the smallest canonical encoding, so the result
    does not depend on the order of ``outputs``. All-nil gives nil.
    """
    counts = Counter(encode_value(output) for output in outputs if output is not None)
    if not counts:
        return None
    best = max(counts.values())
    return decode_value(min(code for code, count in counts.items() if count == best))


def settle_rewards(
    slate: WorkerSlate,
    output: Value,
    ledger: LocalOpinionLedger,
    rule: PunishmentRule = PunishmentRule.RESET,
) -> None:
    """Reward workers that returned the majority output; punish all the others."""
    for worker, returned in zip(slate.workers, slate.returned):
        if output is not None and returned is not None and same_value(returned, output):
            record_reward(ledger, slate.client, worker)
        else:
            record_punishment(ledger, slate.client, worker, rule)


def audit_receipts(
    client: int,
    dispatches: Sequence[DispatchRecord],
    peers: Sequence[PeerRecord],
    ledger: LocalOpinionLedger,
    suite: CryptoSuite,
    rule: PunishmentRule = PunishmentRule.RESET,
) -> int:
    """
    Managers check that the client rewarded every first forwardee.

    Every dispatch that came back over the reverse path through a first
    forwardee needs a receipt whose signatures verify. Otherwise each of the
    client's managers punishes the client.

    Returns:
        int: number of managers that punished the client.
    """
    record = peers[client]
    for dispatch in dispatches:
        if not dispatch.completed_reverse or dispatch.first_hop is None:
            continue
        forwardee = peers[dispatch.first_hop]
        if dispatch.receipt is None or not verify_receipt(
            dispatch.receipt,
            record.pseudonym,
            record.keypair.public_key,
            forwardee.pseudonym,
            forwardee.keypair.public_key,
            dispatch.tag,
            suite,
        ):
            break
    else:
        return 0
    for manager in record.managers:
        record_punishment(ledger, manager, client, rule)
    logger.warning(
        f"Client {record.pseudonym.short} lacks a reward receipt; "
        f"{len(record.managers)} managers punished it"
    )
    return len(record.managers)


def honest_behaviour(worker: int, spec: ComputationSpec, joint: JointInput) -> Value:
    return evaluate(spec, joint)


def _slate_workers(
    world: World, session: Session, mode: Mode, client: int
) -> tuple[int, ...]:
    config = world.config
    if mode is Mode.HBC:
        return select_uniform_workers(client, 1, world.size, world.rng)
    if mode is Mode.BASELINE:
        return select_uniform_workers(
            client, session.redundancy, world.size, world.rng
        )
    kappa = session.kappas.get(client) or sample_kappa(
        session.redundancy,
        config.kappa_max,
        world.size,
        world.rng,
        config.kappa_min,
    )
    g_i = float(world.reputation[client])
    return select_workers(
        g_i,
        kappa,
        session.redundancy,
        world.reputation,
        world.rng,
        client,
        floor=g_i - config.band_below * config.delta,
        ceiling=g_i + config.band_above * config.delta,
    )


def run_session(
    world: World,
    session: Session,
    mode: Mode,
    behaviour: Behaviour | None = None,
    workers: Mapping[int, Sequence[int]] | None = None,
) -> SessionResult:
    """
    Execute one joint computation end to end.

    Parameters:
        world: simulation state; its ledger is mutated in rational mode.
        session: clients, their inputs and the computation C.
        mode: hbc, rational or baseline.
        behaviour: worker model ``(worker, spec, joint) -> output``; honest
            evaluation when omitted.
        workers: fixed worker slates per client, bypassing worker selection.

    Returns:
        SessionResult: per-client outputs, the true outputs and correctness flags.
    """
    slates = {
        client: tuple(workers[client])
        if workers is not None and client in workers
        else _slate_workers(world, session, mode, client)
        for client in session.clients
    }
    computations = {
        client: prune_computation(session.computation, session.inputs, k)
        for k, client in enumerate(session.clients)
    }
    network = SessionNetwork(world, session, mode, behaviour or honest_behaviour)
    network.run(slates, computations)

    worker_slates = [
        WorkerSlate(
            client=client,
            workers=slates[client],
            returned=network.returned_outputs(client),
        )
        for client in session.clients
    ]
    if world.config.publish_output:
        common = majority_output([post.output for post in network.bulletin])
        outputs = {client: common for client in session.clients}
    else:
        outputs = {
            slate.client: majority_output(slate.returned) for slate in worker_slates
        }
    expected = {
        client: evaluate(computations[client], session.inputs)
        for client in session.clients
    }
    correct = {
        client: outputs[client] is not None
        and same_value(outputs[client], expected[client])
        for client in session.clients
    }

    if mode is Mode.RATIONAL:
        for slate in worker_slates:
            settle_rewards(
                slate, outputs[slate.client], world.ledger, world.config.punishment
            )
        if not world.config.publish_output:
            for client in session.clients:
                network.counters.audit_punishments += audit_receipts(
                    client,
                    network.dispatches[client],
                    world.peers,
                    world.ledger,
                    world.suite,
                    world.config.punishment,
                )

    return SessionResult(
        outputs=outputs,
        expected=expected,
        correct=correct,
        slates=worker_slates,
        counters=network.counters,
        bulletin=network.bulletin,
    )
