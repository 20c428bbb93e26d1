"""Small builders shared by several test modules."""

import numpy as np

from coutile.core.config import SimConfig
from coutile.models.channel import RosterView
from coutile.models.identity import Pseudonym, RealId
from coutile.models.reputation import NormalizedTrustMatrix
from coutile.services.identity import derive_pseudonym


def make_pseudonyms(count: int) -> tuple[Pseudonym, ...]:
    """Deterministic pseudonyms of ``peer-0`` … ``peer-{count-1}``."""
    return tuple(
        derive_pseudonym(RealId(id=f"peer-{i}".encode()), b"test-nonce")
        for i in range(count)
    )


def make_roster(reputations: list[float]) -> RosterView:
    return RosterView.build(
        make_pseudonyms(len(reputations)), np.asarray(reputations, dtype=float)
    )


def reconfigure(config: SimConfig, **updates) -> SimConfig:
    """A validated copy of ``config`` with ``updates`` applied."""
    return SimConfig(**{**config.model_dump(), **updates})


def random_trust(size: int, seed: int) -> NormalizedTrustMatrix:
    """A strictly positive row-stochastic matrix, so the power iteration converges."""
    rng = np.random.default_rng(seed)
    raw = rng.random((size, size)) + 0.01
    return NormalizedTrustMatrix(matrix=raw / raw.sum(axis=1, keepdims=True))


def principal_left_eigenvector(matrix: np.ndarray) -> np.ndarray:
    """Dense oracle: eigenvector of cᵀ for the eigenvalue closest to 1, summing to 1."""
    eigenvalues, eigenvectors = np.linalg.eig(matrix.T)
    vector = np.real(eigenvectors[:, np.argmin(np.abs(eigenvalues - 1.0))])
    return vector / vector.sum()


def lazy_reversible_trust(size: int, seed: int) -> NormalizedTrustMatrix:
    """
    Half self-loop, half a random symmetric-weight walk.

    Its eigenvalues are real and lie in [0, 1], so the chain is aperiodic and
    irreducible and the power iteration contracts without oscillating.
    """
    rng = np.random.default_rng(seed)
    weights = rng.random((size, size)) + 0.1
    weights = weights + weights.T
    walk = weights / weights.sum(axis=1, keepdims=True)
    return NormalizedTrustMatrix(matrix=0.5 * np.eye(size) + 0.5 * walk)
