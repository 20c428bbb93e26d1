"""Root conftest for all tests."""

import os
from pathlib import Path

import numpy as np
import pytest

# Keep test output quiet and independent of the developer's shell before
# importing modules that read settings at import time
os.environ["LOG_LEVEL"] = "WARNING"
os.environ.pop("OTEL_EXPORTER_OTLP_ENDPOINT", None)
for name in list(os.environ):
    if name.startswith("COUTILE_"):
        os.environ.pop(name)

from coutile.core.config import SimConfig, get_settings  # noqa: E402
from coutile.core.crypto import CryptoSuite, get_crypto_suite  # noqa: E402
from coutile.models.world import World  # noqa: E402
from coutile.services.simnet import build_world  # noqa: E402

get_settings.cache_clear()

SMALL_PEERS = 12
SMALL_CLIENTS = 4


@pytest.fixture(name="suite")
def suite_fixture() -> CryptoSuite:
    """The default crypto suite."""
    return get_crypto_suite()


@pytest.fixture(name="rng")
def rng_fixture() -> np.random.Generator:
    return np.random.default_rng(2024)


@pytest.fixture(name="small_config")
def small_config_fixture(tmp_path: Path) -> SimConfig:
    """
    A fast, fully honest configuration: 12 peers, 4 clients, 3 workers.

    Returns:
        SimConfig: config writing into the test's temporary directory.
    """
    return SimConfig(
        peers=SMALL_PEERS,
        clients=SMALL_CLIENTS,
        redundancy=3,
        iterations=4,
        kappa_max=6,
        managers=3,
        malicious_frac=0.0,
        seed=7,
        output_dir=tmp_path,
    )


@pytest.fixture(name="small_world")
def small_world_fixture(small_config: SimConfig) -> World:
    return build_world(small_config)
