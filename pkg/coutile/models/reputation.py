"""Reputation state: local opinions, the normalized trust matrix and global reputations."""

from collections.abc import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class LocalOpinionLedger(BaseModel):
    """n×n accumulators; ``counts[i, j]`` is peer i's opinion of peer j."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    counts: np.ndarray

    @classmethod
    def empty(cls, n: int) -> "LocalOpinionLedger":
        return cls(counts=np.zeros((n, n), dtype=float))

    @classmethod
    def seeded(cls, n: int, prior: float) -> "LocalOpinionLedger":
        """Every peer holds opinion ``prior`` of every other peer and none of itself."""
        counts = np.full((n, n), float(prior))
        np.fill_diagonal(counts, 0.0)
        return cls(counts=counts)

    @property
    def size(self) -> int:
        return self.counts.shape[0]


class NormalizedTrustMatrix(BaseModel):
    """Row-stochastic matrix c with c[d, j] = ℓ[d, j] / Σ_j ℓ[d, j]."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray


class ManagerRecords(BaseModel):
    """
    The trust columns each accountability manager holds for its pupils.

    ``columns[pupil][manager]`` is the manager's own copy of column ``pupil``
    of c. Honest managers hold exact copies; a dissenting manager holds
    whatever it chooses to report.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    columns: dict[int, dict[int, np.ndarray]] = Field(default_factory=dict)

    @classmethod
    def from_matrix(
        cls,
        c: NormalizedTrustMatrix,
        managers: Mapping[int, Sequence[int]],
        dissenters: frozenset[int] = frozenset(),
    ) -> "ManagerRecords":
        """Hand every manager a copy of its pupils' columns; dissenters keep zeros."""
        columns: dict[int, dict[int, np.ndarray]] = {}
        for pupil, assigned in managers.items():
            column = c.matrix[:, pupil]
            columns[pupil] = {
                manager: np.zeros_like(column)
                if manager in dissenters
                else column.copy()
                for manager in assigned
            }
        return cls(columns=columns)


class GlobalReputation(BaseModel):
    """Global reputation vector g plus the convergence record of the update that produced it."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    iterations: int = 0
    converged: bool = True
    deltas: list[float] = Field(default_factory=list)
