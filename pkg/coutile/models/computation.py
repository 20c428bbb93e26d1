from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from coutile.models.enums import ComputationKind


class ComputationSpec(BaseModel):
    """
    Declarative joint computation C, or its pruned part C_i.

    ``embedded_input`` carries the client's own input when the computation
    must know which of the joint inputs is the client's.
    """

    model_config = ConfigDict(frozen=True)

    kind: ComputationKind
    embedded_input: Any = None
    params: dict[str, Any] = Field(default_factory=dict)

    @property
    def has_embedded_input(self) -> bool:
        return self.embedded_input is not None


class JointInput(BaseModel):
    """The m inputs a worker collected, in arrival order, with no client identifiers."""

    model_config = ConfigDict(frozen=True)

    values: tuple[Any, ...]

    def __len__(self) -> int:
        return len(self.values)
