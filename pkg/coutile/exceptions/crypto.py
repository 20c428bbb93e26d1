"""Cryptographic contract failures."""

from coutile.exceptions.base import CoutileError


class CryptoError(CoutileError):
    """Base class for cryptographic failures."""

    pass


class DecryptionError(CryptoError):
    """Ciphertext failed authentication or was decrypted under the wrong key."""

    def __init__(self, message: str = "Decryption failed"):
        super().__init__(message)


class PlaintextTooLargeError(CryptoError):
    """Plaintext does not fit in the fixed public-key block."""

    def __init__(self, size: int, limit: int):
        """
        Parameters:
            size (int): Length of the rejected plaintext in bytes.
            limit (int): Largest plaintext the configured block can carry.
        """
        self.size = size
        self.limit = limit
        super().__init__(f"Plaintext of {size} bytes exceeds the {limit}-byte limit")
