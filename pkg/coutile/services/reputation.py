"""Local opinion bookkeeping and the co-utile global reputation update."""

from collections import Counter
from collections.abc import Mapping, Sequence

import numpy as np

from coutile.exceptions import ConfigurationError, SelfRatingError
from coutile.models.enums import PunishmentRule
from coutile.models.reputation import (
    GlobalReputation,
    LocalOpinionLedger,
    ManagerRecords,
    NormalizedTrustMatrix,
)
from coutile.utils.logger import logger


def record_reward(ledger: LocalOpinionLedger, rater: int, ratee: int) -> None:
    """
    Increment ℓ[rater, ratee] by one.

    Raises:
        SelfRatingError: if rater == ratee.
    """
    if rater == ratee:
        raise SelfRatingError(rater)
    ledger.counts[rater, ratee] += 1.0


def record_punishment(
    ledger: LocalOpinionLedger,
    rater: int,
    ratee: int,
    rule: PunishmentRule = PunishmentRule.RESET,
) -> None:
    """
    Lower ℓ[rater, ratee].

    ``RESET`` sets the opinion to zero, the protocol's "assign ℓ = 0".
    ``DECREMENT`` subtracts one and never goes below zero.

    Raises:
        SelfRatingError: if rater == ratee.
    """
    if rater == ratee:
        raise SelfRatingError(rater)
    if rule is PunishmentRule.RESET:
        ledger.counts[rater, ratee] = 0.0
    else:
        ledger.counts[rater, ratee] = max(0.0, ledger.counts[rater, ratee] - 1.0)


def normalize(ledger: LocalOpinionLedger) -> NormalizedTrustMatrix:
    """
    Row-normalize the ledger, ignoring self-opinions.

    A peer that holds no opinion of anybody gets the uniform row 1/n.
    """
    counts = np.clip(ledger.counts, 0.0, None).copy()
    np.fill_diagonal(counts, 0.0)
    n = counts.shape[0]
    sums = counts.sum(axis=1)
    matrix = np.full((n, n), 1.0 / n)
    rated = sums > 0
    matrix[rated] = counts[rated] / sums[rated, None]
    return NormalizedTrustMatrix(matrix=matrix)


def _iterate(
    step,
    g0: np.ndarray,
    epsilon: float,
    max_iter: int,
) -> GlobalReputation:
    g = np.asarray(g0, dtype=float).copy()
    deltas: list[float] = []
    for _ in range(max_iter):
        updated = step(g)
        delta = float(np.max(np.abs(updated - g)))
        deltas.append(delta)
        g = updated
        if delta < epsilon:
            return GlobalReputation(
                values=g, iterations=len(deltas), converged=True, deltas=deltas
            )
    logger.warning(
        f"Global reputation did not converge in {max_iter} iterations "
        f"(last delta {deltas[-1] if deltas else float('nan'):.3e})"
    )
    return GlobalReputation(
        values=g, iterations=len(deltas), converged=False, deltas=deltas
    )


def compute_global(
    c: NormalizedTrustMatrix,
    g0: GlobalReputation | np.ndarray,
    epsilon: float = 1e-6,
    max_iter: int = 1000,
) -> GlobalReputation:
    """
    Power iteration g ← cᵀg until every component moves less than ε.

    Parameters:
        c: row-stochastic trust matrix.
        g0: starting vector summing to 1; the current reputations warm-start the update.
        epsilon: per-component stop tolerance.
        max_iter: iteration cap.

    Returns:
        GlobalReputation: the approximate left principal eigenvector of c. When the cap
        is hit the result is flagged ``converged=False`` and a warning is logged.
    """
    start = g0.values if isinstance(g0, GlobalReputation) else g0
    transposed = c.matrix.T
    return _iterate(lambda g: transposed @ g, start, epsilon, max_iter)


def _majority(copies: Sequence[float]) -> float:
    counts = Counter(copies)
    best = max(counts.values())
    return min(value for value, count in counts.items() if count == best)


def compute_global_distributed(
    c: NormalizedTrustMatrix,
    g0: GlobalReputation | np.ndarray,
    managers: Mapping[int, Sequence[int]],
    epsilon: float = 1e-6,
    max_iter: int = 1000,
    records: ManagerRecords | None = None,
) -> GlobalReputation:
    """
    Global update executed the way accountability managers perform it.

    Every manager of pupil d computes its own copy of g_d from its own record
    of column d and the vector of the previous round; the pupil's value is the
    majority of the copies, ties going to the smallest. A pupil without
    managers computes its own value. When some pupils' majorities dissent, the
    round's vector is rescaled to sum to one.

    Parameters:
        records: per-manager columns; exact copies of c when omitted, in which
            case the result equals compute_global.
    """
    start = g0.values if isinstance(g0, GlobalReputation) else g0
    if records is None:
        records = ManagerRecords.from_matrix(c, managers)
    held_columns = records.columns
    matrix = c.matrix
    n = matrix.shape[0]

    def step(g: np.ndarray) -> np.ndarray:
        updated = np.empty(n)
        for pupil in range(n):
            held = held_columns.get(pupil, {})
            copies = [float(column @ g) for column in held.values()] or [
                float(matrix[:, pupil] @ g)
            ]
            updated[pupil] = _majority(copies)
        total = float(updated.sum())
        if total > 0 and not np.isclose(total, 1.0):
            updated /= total
        return updated

    return _iterate(step, start, epsilon, max_iter)


def admit_new_peer(roster_size: int) -> float:
    """
    Initial global reputation of a newcomer: 1/n.

    Raises:
        ConfigurationError: if the roster is empty.
    """
    if roster_size < 1:
        raise ConfigurationError("roster size must be ≥ 1", "peers")
    return 1.0 / roster_size


def initial_reputation(roster_size: int) -> np.ndarray:
    """Reputation vector of a fresh roster: every peer admitted at 1/n."""
    return np.full(roster_size, admit_new_peer(roster_size))
