"""
Cryptographic contracts used by the channel and reputation protocols.

Two interchangeable suites satisfy the same contracts:

- ``CurveSuite`` (default) uses real primitives from ``cryptography``: X25519 +
  HKDF + AES-GCM hybrid encryption, AES-GCM for symmetric encryption and
  Ed25519 signatures.
- ``DigestSuite`` is a faster construction on keyed BLAKE2b with the same
  Ed25519 signatures. Its public-key encryption is keyed by the public key,
  so it keeps fixed lengths and integrity but offers no confidentiality
  against a peer holding the public key.

Public-key plaintexts are framed as ``u16 length || m || zero padding`` up to
``block_size`` bytes, so every ciphertext of a suite has the same length.
"""

import hashlib
import hmac
from abc import ABC, abstractmethod
from functools import lru_cache

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from coutile.exceptions import DecryptionError, PlaintextTooLargeError
from coutile.models.crypto import KeyPair, SymKey
from coutile.models.enums import CryptoBackend

DEFAULT_BLOCK_SIZE = 256
_LENGTH_PREFIX = 2


def digest(*parts: bytes) -> bytes:
    """256-bit digest of the length-prefixed concatenation of ``parts``."""
    h = hashlib.sha256()
    for part in parts:
        h.update(len(part).to_bytes(4, "big"))
        h.update(part)
    return h.digest()


def _blake(data: bytes, size: int, person: bytes, key: bytes = b"") -> bytes:
    return hashlib.blake2b(data, digest_size=size, key=key, person=person).digest()


def _ed25519_verify(public_key: bytes, m: bytes, sig: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(sig, m)
    except (InvalidSignature, ValueError):
        return False
    return True


def _xor(left: bytes, right: bytes) -> bytes:
    size = len(left)
    if size == 0:
        return b""
    value = int.from_bytes(left, "big") ^ int.from_bytes(right[:size], "big")
    return value.to_bytes(size, "big")


class CryptoSuite(ABC):
    """Probabilistic fixed-length PKE, authenticated symmetric encryption and signatures."""

    backend: CryptoBackend

    def __init__(self, block_size: int = DEFAULT_BLOCK_SIZE):
        self.block_size = block_size

    @property
    def max_plaintext(self) -> int:
        """Largest plaintext accepted by pke_encrypt."""
        return self.block_size - _LENGTH_PREFIX

    @property
    @abstractmethod
    def ciphertext_length(self) -> int:
        """Length of every public-key ciphertext produced by this suite."""

    def _pad(self, m: bytes) -> bytes:
        if len(m) > self.max_plaintext:
            raise PlaintextTooLargeError(len(m), self.max_plaintext)
        block = len(m).to_bytes(_LENGTH_PREFIX, "big") + m
        return block + bytes(self.block_size - len(block))

    def _unpad(self, block: bytes) -> bytes:
        size = int.from_bytes(block[:_LENGTH_PREFIX], "big")
        if size > self.max_plaintext:
            raise DecryptionError("Invalid plaintext framing")
        return block[_LENGTH_PREFIX : _LENGTH_PREFIX + size]

    def generate_keypair(self, seed: bytes) -> KeyPair:
        """Derive a key pair deterministically from a 32-byte seed."""
        public_key, secret_key = self._keypair_from_seed(seed)
        return KeyPair(public_key=public_key, secret_key=secret_key)

    @abstractmethod
    def _keypair_from_seed(self, seed: bytes) -> tuple[bytes, bytes]: ...

    @abstractmethod
    def pke_encrypt(self, pk: bytes, m: bytes, randomness: bytes) -> bytes:
        """
        Encrypt ``m`` under ``pk`` using caller-supplied randomness.

        Raises:
            PlaintextTooLargeError: if ``m`` does not fit in one block.
        """

    @abstractmethod
    def pke_decrypt(self, sk: bytes, c: bytes) -> bytes:
        """
        Recover the plaintext of ``c``.

        Raises:
            DecryptionError: on wrong key, tampering or truncation.
        """

    @abstractmethod
    def sym_encrypt(self, k: SymKey, m: bytes) -> bytes: ...

    @abstractmethod
    def sym_decrypt(self, k: SymKey, c: bytes) -> bytes:
        """
        Raises:
            DecryptionError: on wrong key or tampering.
        """

    @abstractmethod
    def sign(self, sk: bytes, m: bytes) -> bytes: ...

    @abstractmethod
    def verify(self, pk: bytes, m: bytes, sig: bytes) -> bool: ...


class DigestSuite(CryptoSuite):
    """
    Fast suite: keyed-BLAKE2b encryption with Ed25519 signatures.

    A public key is ``BLAKE2b(sk) || Ed25519 public key``. Signatures need the
    secret key. Encryption is keyed by the first half of the public key, so
    any holder of ``pk`` can read the plaintexts; use it only for runs whose
    peers never inspect ciphertexts.
    """

    backend = CryptoBackend.DIGEST
    _NONCE = 16
    _TAG = 32
    _STREAM_KEY = 32

    @property
    def ciphertext_length(self) -> int:
        return self._NONCE + self.block_size + self._TAG

    @staticmethod
    def _signing_key(sk: bytes) -> Ed25519PrivateKey:
        return Ed25519PrivateKey.from_private_bytes(_blake(sk, 32, b"coutile-ed25519"))

    def _keypair_from_seed(self, seed: bytes) -> tuple[bytes, bytes]:
        secret_key = _blake(seed, 32, b"coutile-sk")
        public_key = (
            self._stream_key_of(secret_key)
            + self._signing_key(secret_key).public_key().public_bytes_raw()
        )
        return public_key, secret_key

    @staticmethod
    def _stream_key_of(secret_key: bytes) -> bytes:
        return _blake(secret_key, 32, b"coutile-pk")

    @staticmethod
    def _keystream(key: bytes, nonce: bytes, size: int) -> bytes:
        blocks = []
        for counter in range((size + 63) // 64):
            blocks.append(
                _blake(nonce + counter.to_bytes(4, "big"), 64, b"coutile-ks", key)
            )
        return b"".join(blocks)[:size]

    def pke_encrypt(self, pk: bytes, m: bytes, randomness: bytes) -> bytes:
        block = self._pad(m)
        key = pk[: self._STREAM_KEY]
        nonce = _blake(randomness, self._NONCE, b"coutile-nonce")
        body = _xor(block, self._keystream(key, nonce, len(block)))
        tag = _blake(nonce + body, self._TAG, b"coutile-tag", key)
        return nonce + body + tag

    def pke_decrypt(self, sk: bytes, c: bytes) -> bytes:
        if len(c) != self.ciphertext_length:
            raise DecryptionError("Ciphertext has the wrong length")
        key = self._stream_key_of(sk)
        nonce, body, tag = (
            c[: self._NONCE],
            c[self._NONCE : -self._TAG],
            c[-self._TAG :],
        )
        expected = _blake(nonce + body, self._TAG, b"coutile-tag", key)
        if not hmac.compare_digest(tag, expected):
            raise DecryptionError()
        return self._unpad(_xor(body, self._keystream(key, nonce, len(body))))

    def sym_encrypt(self, k: SymKey, m: bytes) -> bytes:
        # Synthetic IV: the MAC of the plaintext doubles as keystream nonce.
        iv = _blake(m, self._NONCE, b"coutile-siv", k.key)
        return iv + _xor(m, self._keystream(k.key, iv, len(m)))

    def sym_decrypt(self, k: SymKey, c: bytes) -> bytes:
        if len(c) < self._NONCE:
            raise DecryptionError("Ciphertext too short")
        iv, body = c[: self._NONCE], c[self._NONCE :]
        m = _xor(body, self._keystream(k.key, iv, len(body)))
        if not hmac.compare_digest(iv, _blake(m, self._NONCE, b"coutile-siv", k.key)):
            raise DecryptionError()
        return m

    def sign(self, sk: bytes, m: bytes) -> bytes:
        return self._signing_key(sk).sign(m)

    def verify(self, pk: bytes, m: bytes, sig: bytes) -> bool:
        return _ed25519_verify(pk[self._STREAM_KEY :], m, sig)


class CurveSuite(CryptoSuite):
    """X25519/AES-GCM encryption and Ed25519 signatures from ``cryptography``."""

    backend = CryptoBackend.CURVE
    _POINT = 32
    _GCM_NONCE = 12
    _GCM_TAG = 16

    @property
    def ciphertext_length(self) -> int:
        return self._POINT + self._GCM_NONCE + self.block_size + self._GCM_TAG

    @staticmethod
    def _exchange_key(sk: bytes) -> X25519PrivateKey:
        return X25519PrivateKey.from_private_bytes(_blake(sk, 32, b"coutile-x25519"))

    @staticmethod
    def _signing_key(sk: bytes) -> Ed25519PrivateKey:
        return Ed25519PrivateKey.from_private_bytes(_blake(sk, 32, b"coutile-ed25519"))

    def _keypair_from_seed(self, seed: bytes) -> tuple[bytes, bytes]:
        secret_key = _blake(seed, 32, b"coutile-sk")
        public_key = (
            self._exchange_key(secret_key).public_key().public_bytes_raw()
            + self._signing_key(secret_key).public_key().public_bytes_raw()
        )
        return public_key, secret_key

    @staticmethod
    def _derive(shared: bytes, ephemeral: bytes, recipient: bytes) -> bytes:
        return HKDF(
            algorithm=hashes.SHA256(),
            length=32,
            salt=None,
            info=b"coutile-pke" + ephemeral + recipient,
        ).derive(shared)

    def pke_encrypt(self, pk: bytes, m: bytes, randomness: bytes) -> bytes:
        block = self._pad(m)
        recipient = pk[: self._POINT]
        ephemeral = X25519PrivateKey.from_private_bytes(
            _blake(randomness, 32, b"coutile-eph")
        )
        ephemeral_pub = ephemeral.public_key().public_bytes_raw()
        shared = ephemeral.exchange(X25519PublicKey.from_public_bytes(recipient))
        key = self._derive(shared, ephemeral_pub, recipient)
        nonce = _blake(randomness, self._GCM_NONCE, b"coutile-gcm")
        return ephemeral_pub + nonce + AESGCM(key).encrypt(nonce, block, ephemeral_pub)

    def pke_decrypt(self, sk: bytes, c: bytes) -> bytes:
        if len(c) != self.ciphertext_length:
            raise DecryptionError("Ciphertext has the wrong length")
        ephemeral_pub = c[: self._POINT]
        nonce = c[self._POINT : self._POINT + self._GCM_NONCE]
        body = c[self._POINT + self._GCM_NONCE :]
        private = self._exchange_key(sk)
        recipient = private.public_key().public_bytes_raw()
        try:
            shared = private.exchange(X25519PublicKey.from_public_bytes(ephemeral_pub))
            key = self._derive(shared, ephemeral_pub, recipient)
            block = AESGCM(key).decrypt(nonce, body, ephemeral_pub)
        except (InvalidTag, ValueError) as exc:
            raise DecryptionError() from exc
        return self._unpad(block)

    def sym_encrypt(self, k: SymKey, m: bytes) -> bytes:
        nonce = hmac.new(k.key, m, hashlib.sha256).digest()[: self._GCM_NONCE]
        return nonce + AESGCM(k.key).encrypt(nonce, m, None)

    def sym_decrypt(self, k: SymKey, c: bytes) -> bytes:
        if len(c) < self._GCM_NONCE + self._GCM_TAG:
            raise DecryptionError("Ciphertext too short")
        try:
            return AESGCM(k.key).decrypt(
                c[: self._GCM_NONCE], c[self._GCM_NONCE :], None
            )
        except (InvalidTag, ValueError) as exc:
            raise DecryptionError() from exc

    def sign(self, sk: bytes, m: bytes) -> bytes:
        return self._signing_key(sk).sign(m)

    def verify(self, pk: bytes, m: bytes, sig: bytes) -> bool:
        return _ed25519_verify(pk[self._POINT :], m, sig)


@lru_cache()
def get_crypto_suite(
    backend: CryptoBackend = CryptoBackend.CURVE,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> CryptoSuite:
    """
    Return the (stateless, cached) suite for a backend and block size.

    Example:
        >>> suite = get_crypto_suite(CryptoBackend.CURVE)
        >>> suite.ciphertext_length
        316
    """
    if backend is CryptoBackend.DIGEST:
        return DigestSuite(block_size)
    return CurveSuite(block_size)
