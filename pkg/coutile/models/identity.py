"""Identity models: real identities, pseudonyms and accountability-manager sets."""

from pydantic import BaseModel, ConfigDict, Field


class RealId(BaseModel):
    """A peer's public identity, unique across the roster."""

    model_config = ConfigDict(frozen=True)

    id: bytes = Field(min_length=1)


class Pseudonym(BaseModel):
    """Fixed-length digest of a real identity and a secret nonce."""

    model_config = ConfigDict(frozen=True)

    value: bytes = Field(min_length=32, max_length=32)

    @property
    def short(self) -> str:
        """First 16 hex characters, used in traces and logs."""
        return self.value.hex()[:16]

    def __str__(self) -> str:
        return self.short


class AmAssignment(BaseModel):
    """The accountability managers in charge of one subject."""

    model_config = ConfigDict(frozen=True)

    subject: Pseudonym
    managers: tuple[Pseudonym, ...] = ()
