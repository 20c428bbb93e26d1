"""
Deterministic simulation of the co-utile network.

One ``numpy.random.Generator`` seeded from the config drives every draw of a
run in event order, so equal (config, seed) pairs give identical worlds,
identical metrics and byte-identical CSVs.
"""

from collections import defaultdict
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from itertools import product

import numpy as np

from coutile.core.config import SimConfig
from coutile.core.crypto import get_crypto_suite
from coutile.core.telemetry import tracer
from coutile.models.computation import ComputationSpec, JointInput
from coutile.models.enums import ClientClass, ComputationKindName, Mode
from coutile.models.identity import RealId
from coutile.models.metrics import (
    ClassRate,
    IterationMetrics,
    RequestRecord,
    RunMetrics,
    SweepRow,
)
from coutile.models.reputation import (
    GlobalReputation,
    LocalOpinionLedger,
    ManagerRecords,
)
from coutile.models.session import Session
from coutile.models.world import PeerRecord, World
from coutile.services.computations import (
    build_computation,
    evaluate,
    random_output,
)
from coutile.services.identity import (
    assign_accountability_managers,
    derive_pseudonym,
)
from coutile.services.mpc import run_session
from coutile.services.network import Behaviour
from coutile.services.reputation import (
    compute_global,
    compute_global_distributed,
    initial_reputation,
    normalize,
)
from coutile.utils.codec import Value
from coutile.utils.logger import logger

INPUT_RANGE = 10**6
_PSEUDONYM_NONCE = 16
_KEY_SEED = 32


def build_world(config: SimConfig, seed: int | None = None) -> World:
    """
    Create the roster: identities, pseudonyms, keys, goodness and managers.

    ⌊malicious_frac · n⌋ peers, drawn at random, get goodness 0 and the rest
    goodness 1. Every peer starts with reputation 1/n and opinion
    ``opinion_prior`` of every other peer. Manager sets are fixed for the
    whole run.
    """
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    suite = get_crypto_suite(config.crypto_backend, config.block_size)
    n = config.peers

    real_ids = [RealId(id=f"peer-{i:04d}".encode()) for i in range(n)]
    nonces = [rng.bytes(_PSEUDONYM_NONCE) for _ in range(n)]
    pseudonyms = [derive_pseudonym(rid, nonce) for rid, nonce in zip(real_ids, nonces)]
    keypairs = [suite.generate_keypair(rng.bytes(_KEY_SEED)) for _ in range(n)]
    malicious = set(rng.permutation(n)[: config.malicious_count].tolist())
    non_rewarding = set(rng.permutation(n)[: config.non_rewarding_count].tolist())
    positions = {p: i for i, p in enumerate(pseudonyms)}

    peers = []
    for i in range(n):
        assignment = assign_accountability_managers(
            pseudonyms[i], pseudonyms, config.managers
        )
        peers.append(
            PeerRecord(
                index=i,
                real_id=real_ids[i],
                nonce=nonces[i],
                pseudonym=pseudonyms[i],
                keypair=keypairs[i],
                goodness=0.0 if i in malicious else 1.0,
                managers=tuple(positions[m] for m in assignment.managers),
                malicious=i in malicious,
                non_rewarding=i in non_rewarding,
            )
        )
    logger.debug(
        f"Built world: {n} peers, {len(malicious)} malicious, seed {seed}, "
        f"{suite.backend.value} crypto"
    )
    return World(
        config=config,
        seed=seed,
        peers=peers,
        ledger=LocalOpinionLedger.seeded(n, config.opinion_prior),
        reputation=initial_reputation(n),
        rng=rng,
        suite=suite,
    )


def malicious_worker_output(
    spec: ComputationSpec,
    inputs: JointInput | Sequence[Value],
    rng: np.random.Generator,
) -> Value:
    """A cheating worker's answer: uniform over the output domain, blind to the truth."""
    return random_output(spec, inputs, rng)


def goodness_behaviour(world: World) -> Behaviour:
    """Workers compute honestly with probability equal to their goodness, drawn per act."""

    def behave(worker: int, spec: ComputationSpec, joint: JointInput) -> Value:
        if world.rng.random() < world.peers[worker].goodness:
            return evaluate(spec, joint)
        return malicious_worker_output(spec, joint, world.rng)

    return behave


def draw_inputs(config: SimConfig, count: int, rng: np.random.Generator) -> list[Value]:
    """Distinct integers in [0, 10⁶), or random ballots for the tally computation."""
    if config.computation is ComputationKindName.TALLY:
        return [str(vote) for vote in rng.choice(config.tally_options, size=count)]
    return [int(value) for value in rng.choice(INPUT_RANGE, size=count, replace=False)]


def update_reputation(world: World) -> GlobalReputation:
    """
    Normalize the ledger and run the global update, warm-started from the current vector.

    With ``malicious_managers`` set, malicious peers acting as managers report
    a zeroed column for their pupils and the majority of copies decides.
    """
    config = world.config
    trust = normalize(world.ledger)
    if config.distributed_reputation:
        managers = {peer.index: peer.managers for peer in world.peers}
        dissenters = (
            frozenset(peer.index for peer in world.peers if peer.malicious)
            if config.malicious_managers
            else frozenset()
        )
        result = compute_global_distributed(
            trust,
            world.reputation,
            managers,
            config.epsilon,
            config.max_iter,
            ManagerRecords.from_matrix(trust, managers, dissenters),
        )
    else:
        result = compute_global(
            trust, world.reputation, config.epsilon, config.max_iter
        )
    world.reputation = result.values
    return result


def run_iteration(world: World) -> IterationMetrics:
    """
    One joint computation by m random clients followed by the reputation update.

    The reputation update only runs in rational mode; the other modes never
    read or write reputations.
    """
    config = world.config
    world.iteration += 1
    with tracer.start_as_current_span("coutile.iteration") as span:
        span.set_attribute("iteration", world.iteration)
        span.set_attribute("mode", config.mode.value)
        span.set_attribute("seed", world.seed)

        clients = tuple(
            int(client)
            for client in world.rng.choice(
                world.size, size=config.clients, replace=False
            )
        )
        session = Session(
            clients=clients,
            inputs=tuple(draw_inputs(config, len(clients), world.rng)),
            computation=build_computation(config),
            redundancy=config.redundancy,
        )
        at_request = world.reputation.copy()
        result = run_session(world, session, config.mode, goodness_behaviour(world))
        records = [
            RequestRecord(
                iteration=world.iteration,
                client=client,
                client_reputation=float(at_request[client]),
                output_correct=result.correct[client],
            )
            for client in clients
        ]
        metrics = IterationMetrics(
            iteration=world.iteration, records=records, counters=result.counters
        )
        if config.mode is Mode.RATIONAL:
            update = update_reputation(world)
            metrics.reputation_rounds = update.iterations
            metrics.reputation_converged = update.converged
        return metrics


def run_simulation(config: SimConfig, world: World | None = None) -> RunMetrics:
    """Run T iterations on a fresh (or the given) world and collect the metrics."""
    if world is None:
        world = build_world(config)
    metrics = RunMetrics(
        mode=config.mode,
        seed=world.seed,
        malicious_frac=config.malicious_frac,
        iterations=config.iterations,
        goodness=[peer.goodness for peer in world.peers],
        final_reputation=world.reputation.tolist(),
    )
    with tracer.start_as_current_span("coutile.run") as span:
        span.set_attribute("mode", config.mode.value)
        span.set_attribute("seed", world.seed)
        logger.info(
            f"Simulating {config.iterations} iterations: n={config.peers}, "
            f"m={config.clients}, r={config.redundancy}, mode={config.mode.value}, "
            f"seed={world.seed}"
        )
        for _ in range(config.iterations):
            iteration = run_iteration(world)
            metrics.records.extend(iteration.records)
            metrics.per_iteration.append(iteration)
            metrics.counters.merge(iteration.counters)
            if iteration.iteration % 50 == 0:
                logger.info(f"Iteration {iteration.iteration}/{config.iterations}")
    metrics.final_reputation = world.reputation.tolist()
    correct = sum(record.output_correct for record in metrics.records)
    logger.info(
        f"Run finished: {correct}/{len(metrics.records)} correct outputs, "
        f"{metrics.counters.discards} discards, {metrics.counters.refusals} refusals"
    )
    return metrics


def _sweep_point(config: SimConfig) -> tuple[float, Mode, list[ClassRate]]:
    metrics = run_simulation(config)
    return config.malicious_frac, config.mode, metrics.class_rates()


def run_sweep(
    config: SimConfig,
    fracs: Iterable[float],
    modes: Iterable[Mode],
    seeds: Iterable[int],
    workers: int = 1,
) -> list[SweepRow]:
    """
    Run the malicious_frac × mode × seed grid and pool the correct rates per class.

    Each grid point is an isolated deterministic run, so points may execute in
    a process pool without changing the result.
    """
    points = [
        SimConfig(
            **{
                **config.model_dump(),
                "malicious_frac": frac,
                "mode": mode,
                "seed": seed,
            }
        )
        for frac, mode, seed in product(fracs, modes, seeds)
    ]
    logger.info(f"Sweeping {len(points)} runs with {workers} worker(s)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_point, points))
    else:
        outcomes = [_sweep_point(point) for point in points]

    totals: dict[tuple[float, Mode, ClientClass], list[int]] = defaultdict(
        lambda: [0, 0]
    )
    for frac, mode, rates in outcomes:
        for rate in rates:
            total = totals[(frac, mode, rate.client_class)]
            total[0] += rate.requests
            total[1] += rate.correct
    return [
        SweepRow(
            malicious_frac=frac,
            mode=mode,
            client_class=client_class,
            rate=correct / requests,
        )
        for (frac, mode, client_class), (requests, correct) in totals.items()
    ]
