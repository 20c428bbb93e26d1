"""
Coutile exceptions module.

This module keeps the error hierarchy separate from its consumers:
- Base exceptions define the hierarchy
- Configuration, crypto, protocol and computation errors group per concern
- Exit-code mapping for the command line is handled in coutile/core/error_handlers.py
"""

from coutile.exceptions.base import CoutileError
from coutile.exceptions.config import ConfigurationError
from coutile.exceptions.crypto import (
    CryptoError,
    DecryptionError,
    PlaintextTooLargeError,
)
from coutile.exceptions.protocol import (
    ProtocolError,
    SelfRatingError,
    NoForwardeeError,
    AnonymityViolationError,
    IdentityError,
)
from coutile.exceptions.computation import (
    ComputationError,
    EvaluationError,
    MalformedSpecError,
    CodecError,
)

__all__ = [
    # Base
    "CoutileError",
    # Configuration
    "ConfigurationError",
    # Crypto
    "CryptoError",
    "DecryptionError",
    "PlaintextTooLargeError",
    # Protocol
    "ProtocolError",
    "SelfRatingError",
    "NoForwardeeError",
    "AnonymityViolationError",
    "IdentityError",
    # Computation
    "ComputationError",
    "EvaluationError",
    "MalformedSpecError",
    "CodecError",
]
