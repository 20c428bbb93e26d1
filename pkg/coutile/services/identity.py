"""Pseudonym derivation and pseudorandom accountability-manager assignment."""

import hmac
from collections.abc import Sequence

from coutile.core.crypto import digest
from coutile.exceptions import ConfigurationError, IdentityError
from coutile.models.identity import AmAssignment, Pseudonym, RealId


def _raw(identity: RealId | bytes) -> bytes:
    return identity.id if isinstance(identity, RealId) else identity


def derive_pseudonym(identity: RealId | bytes, nonce: bytes) -> Pseudonym:
    """
    Pseudonym P = H(id ∥ nonce), with both parts length-prefixed.

    Raises:
        IdentityError: if the nonce is empty.
    """
    if not nonce:
        raise IdentityError("Pseudonym nonce must be non-empty")
    return Pseudonym(value=digest(_raw(identity), nonce))


def prove_pseudonym(identity: RealId | bytes, nonce: bytes, p: Pseudonym) -> bool:
    """True iff (identity, nonce) opens pseudonym ``p``."""
    if not nonce:
        return False
    return hmac.compare_digest(derive_pseudonym(identity, nonce).value, p.value)


def assign_accountability_managers(
    p: Pseudonym, roster: Sequence[Pseudonym], managers: int
) -> AmAssignment:
    """
    Pick ``managers`` distinct roster members other than ``p`` by hash chain.

    Index k of the chain is ``H(p ∥ k) mod len(roster)``; repeats and the subject
    itself are skipped. The result is a pure function of (p, roster order, M):
    the same roster in the same order always yields the same managers.

    Raises:
        ConfigurationError: if M ≥ roster size.
    """
    if managers < 0 or managers >= len(roster):
        raise ConfigurationError(
            f"managers (M={managers}) must be < roster size ({len(roster)})",
            "managers",
        )
    chosen: list[Pseudonym] = []
    seen: set[Pseudonym] = {p}
    k = 0
    while len(chosen) < managers:
        index = int.from_bytes(digest(p.value, k.to_bytes(8, "big")), "big") % len(
            roster
        )
        k += 1
        candidate = roster[index]
        if candidate in seen:
            continue
        seen.add(candidate)
        chosen.append(candidate)
    return AmAssignment(subject=p, managers=tuple(chosen))
