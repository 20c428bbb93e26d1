"""Key material and signature models."""

from pydantic import BaseModel, ConfigDict, Field

from coutile.models.identity import Pseudonym


class KeyPair(BaseModel):
    """Public/secret key pair; decrypt(secret, encrypt(public, m, r)) == m."""

    model_config = ConfigDict(frozen=True)

    public_key: bytes
    secret_key: bytes = Field(repr=False)


class SymKey(BaseModel):
    """Symmetric key protecting one computation output on the reverse path."""

    model_config = ConfigDict(frozen=True)

    key: bytes = Field(min_length=32, max_length=32, repr=False)


class Signature(BaseModel):
    """Signature bytes together with the pseudonym of the signer."""

    model_config = ConfigDict(frozen=True)

    signer: Pseudonym
    sig: bytes
