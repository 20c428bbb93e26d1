"""Tests for the crypto suites: PKE, symmetric encryption and signatures."""

import hashlib

import pytest
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from hypothesis import given, settings
from hypothesis import strategies as st

from coutile.core.crypto import (
    CryptoSuite,
    CurveSuite,
    DigestSuite,
    digest,
    get_crypto_suite,
)
from coutile.exceptions import DecryptionError, PlaintextTooLargeError
from coutile.models.crypto import SymKey
from coutile.models.enums import CryptoBackend

SEED_A = bytes(range(32))
SEED_B = bytes(range(32, 64))
RANDOMNESS_1 = b"\x01" * 32
RANDOMNESS_2 = b"\x02" * 32
KEY_1 = SymKey(key=b"k" * 32)
KEY_2 = SymKey(key=b"K" * 32)


@pytest.fixture(
    name="any_suite", params=list(CryptoBackend), ids=lambda backend: backend.value
)
def any_suite_fixture(request) -> CryptoSuite:
    """Every backend must satisfy the same contracts."""
    return get_crypto_suite(request.param)


def _flip(data: bytes, index: int) -> bytes:
    return data[:index] + bytes([data[index] ^ 0x01]) + data[index + 1 :]


class TestKeyPairs:
    def test_generation_is_deterministic(self, any_suite: CryptoSuite):
        assert any_suite.generate_keypair(SEED_A) == any_suite.generate_keypair(SEED_A)

    def test_distinct_seeds_give_distinct_keys(self, any_suite: CryptoSuite):
        first = any_suite.generate_keypair(SEED_A)
        second = any_suite.generate_keypair(SEED_B)
        assert first.public_key != second.public_key
        assert first.secret_key != second.secret_key


class TestPublicKeyEncryption:
    def test_round_trip(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        c = any_suite.pke_encrypt(keys.public_key, b"input 42", RANDOMNESS_1)
        assert any_suite.pke_decrypt(keys.secret_key, c) == b"input 42"

    @pytest.mark.parametrize("size", [0, 1, 100])
    def test_ciphertexts_have_fixed_length(self, any_suite: CryptoSuite, size: int):
        keys = any_suite.generate_keypair(SEED_A)
        c = any_suite.pke_encrypt(keys.public_key, b"x" * size, RANDOMNESS_1)
        assert len(c) == any_suite.ciphertext_length

    def test_largest_plaintext_fits(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        m = b"m" * any_suite.max_plaintext
        c = any_suite.pke_encrypt(keys.public_key, m, RANDOMNESS_1)
        assert any_suite.pke_decrypt(keys.secret_key, c) == m

    def test_encryption_is_probabilistic(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        first = any_suite.pke_encrypt(keys.public_key, b"same", RANDOMNESS_1)
        second = any_suite.pke_encrypt(keys.public_key, b"same", RANDOMNESS_2)
        assert first != second

    def test_oversize_plaintext_rejected(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        with pytest.raises(PlaintextTooLargeError) as exc_info:
            any_suite.pke_encrypt(
                keys.public_key, b"x" * (any_suite.max_plaintext + 1), RANDOMNESS_1
            )
        assert exc_info.value.limit == any_suite.max_plaintext

    def test_wrong_secret_key_fails(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        other = any_suite.generate_keypair(SEED_B)
        c = any_suite.pke_encrypt(keys.public_key, b"secret", RANDOMNESS_1)
        with pytest.raises(DecryptionError):
            any_suite.pke_decrypt(other.secret_key, c)

    def test_truncated_ciphertext_fails(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        c = any_suite.pke_encrypt(keys.public_key, b"secret", RANDOMNESS_1)
        with pytest.raises(DecryptionError):
            any_suite.pke_decrypt(keys.secret_key, c[:-1])

    def test_tampered_ciphertext_fails(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        c = any_suite.pke_encrypt(keys.public_key, b"secret", RANDOMNESS_1)
        with pytest.raises(DecryptionError):
            any_suite.pke_decrypt(keys.secret_key, _flip(c, len(c) // 2))


class TestSymmetricEncryption:
    def test_round_trip(self, any_suite: CryptoSuite):
        assert any_suite.sym_decrypt(KEY_1, any_suite.sym_encrypt(KEY_1, b"7")) == b"7"

    def test_empty_plaintext_round_trip(self, any_suite: CryptoSuite):
        assert any_suite.sym_decrypt(KEY_1, any_suite.sym_encrypt(KEY_1, b"")) == b""

    def test_wrong_key_fails(self, any_suite: CryptoSuite):
        c = any_suite.sym_encrypt(KEY_1, b"output")
        with pytest.raises(DecryptionError):
            any_suite.sym_decrypt(KEY_2, c)

    def test_tampered_ciphertext_fails(self, any_suite: CryptoSuite):
        c = any_suite.sym_encrypt(KEY_1, b"output")
        with pytest.raises(DecryptionError):
            any_suite.sym_decrypt(KEY_1, _flip(c, len(c) - 1))


class TestSignatures:
    def test_honest_signature_verifies(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        sig = any_suite.sign(keys.secret_key, b"commitment")
        assert any_suite.verify(keys.public_key, b"commitment", sig)

    def test_flipped_message_bit_fails(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        sig = any_suite.sign(keys.secret_key, b"commitment")
        assert not any_suite.verify(keys.public_key, _flip(b"commitment", 0), sig)

    def test_replayed_signature_fails(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        sig = any_suite.sign(keys.secret_key, b"reward peer 3")
        assert not any_suite.verify(keys.public_key, b"reward peer 4", sig)

    def test_signature_of_other_signer_fails(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        other = any_suite.generate_keypair(SEED_B)
        sig = any_suite.sign(other.secret_key, b"commitment")
        assert not any_suite.verify(keys.public_key, b"commitment", sig)

    def test_signature_from_public_key_alone_fails(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        message = b"commitment"
        forgeries = [
            hashlib.blake2b(
                message,
                digest_size=64,
                key=keys.public_key[:32],
                person=b"coutile-sig",
            ).digest(),
            Ed25519PrivateKey.from_private_bytes(keys.public_key[-32:]).sign(message),
            any_suite.sign(keys.public_key[:32], message),
        ]
        assert not any(
            any_suite.verify(keys.public_key, message, forged) for forged in forgeries
        )

    def test_public_key_carries_signing_half(self, any_suite: CryptoSuite):
        keys = any_suite.generate_keypair(SEED_A)
        verifying = Ed25519PublicKey.from_public_bytes(keys.public_key[-32:])
        verifying.verify(any_suite.sign(keys.secret_key, b"m"), b"m")


class TestConfidentiality:
    def test_curve_ciphertext_unreadable_with_public_key(self):
        suite = get_crypto_suite(CryptoBackend.CURVE)
        keys = suite.generate_keypair(SEED_A)
        c = suite.pke_encrypt(keys.public_key, b"secret input", RANDOMNESS_1)
        with pytest.raises(DecryptionError):
            suite.pke_decrypt(keys.public_key[:32], c)

    def test_curve_is_the_default_backend(self):
        assert isinstance(get_crypto_suite(), CurveSuite)


class TestSuiteFactory:
    def test_suites_are_cached(self):
        assert get_crypto_suite(CryptoBackend.CURVE) is get_crypto_suite(
            CryptoBackend.CURVE
        )

    def test_backend_classes(self):
        assert isinstance(get_crypto_suite(CryptoBackend.DIGEST), DigestSuite)
        assert isinstance(get_crypto_suite(CryptoBackend.CURVE), CurveSuite)

    def test_ciphertext_lengths(self):
        assert get_crypto_suite(CryptoBackend.DIGEST).ciphertext_length == 304
        assert get_crypto_suite(CryptoBackend.CURVE).ciphertext_length == 316
        assert get_crypto_suite(CryptoBackend.CURVE, 128).ciphertext_length == 188


def test_digest_is_length_prefixed():
    """Moving bytes between parts changes the digest."""
    assert digest(b"ab", b"c") != digest(b"a", b"bc")
    assert len(digest(b"x")) == 32


@settings(max_examples=50, deadline=None)
@given(plaintext=st.binary(max_size=254), randomness=st.binary(min_size=32, max_size=32))
def test_pke_round_trip_property(plaintext: bytes, randomness: bytes):
    suite = get_crypto_suite(CryptoBackend.DIGEST)
    keys = suite.generate_keypair(SEED_A)
    c = suite.pke_encrypt(keys.public_key, plaintext, randomness)
    assert len(c) == suite.ciphertext_length
    assert suite.pke_decrypt(keys.secret_key, c) == plaintext
