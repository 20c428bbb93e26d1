"""Performance benchmarks for the two crypto suites."""

import pytest
from pytest_codspeed import BenchmarkFixture

from coutile.core.crypto import get_crypto_suite
from coutile.models.crypto import SymKey
from coutile.models.enums import CryptoBackend

PLAINTEXT = b"x" * 200
RANDOMNESS = b"r" * 32


@pytest.mark.parametrize("backend", list(CryptoBackend))
def test_pke_round_trip_performance(benchmark: BenchmarkFixture, backend: CryptoBackend):
    """Benchmark one public-key encryption and decryption of a full block."""
    suite = get_crypto_suite(backend)
    keys = suite.generate_keypair(b"k" * 32)

    @benchmark
    def round_trip():
        ciphertext = suite.pke_encrypt(keys.public_key, PLAINTEXT, RANDOMNESS)
        return suite.pke_decrypt(keys.secret_key, ciphertext)


@pytest.mark.parametrize("backend", list(CryptoBackend))
def test_sym_round_trip_performance(benchmark: BenchmarkFixture, backend: CryptoBackend):
    suite = get_crypto_suite(backend)
    key = SymKey(key=b"s" * 32)

    @benchmark
    def round_trip():
        return suite.sym_decrypt(key, suite.sym_encrypt(key, PLAINTEXT))


@pytest.mark.parametrize("backend", list(CryptoBackend))
def test_sign_verify_performance(benchmark: BenchmarkFixture, backend: CryptoBackend):
    suite = get_crypto_suite(backend)
    keys = suite.generate_keypair(b"k" * 32)

    @benchmark
    def sign_and_verify():
        signature = suite.sign(keys.secret_key, PLAINTEXT)
        return suite.verify(keys.public_key, PLAINTEXT, signature)
