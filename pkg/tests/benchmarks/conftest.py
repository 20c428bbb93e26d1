"""Shared fixtures for benchmark tests."""

import numpy as np
import pytest

from coutile.core.config import SimConfig
from coutile.models.reputation import LocalOpinionLedger


@pytest.fixture(name="bench_config")
def bench_config_fixture(tmp_path) -> SimConfig:
    """The default network size with a short run, so one benchmark round stays quick."""
    return SimConfig(peers=100, clients=10, iterations=2, seed=3, output_dir=tmp_path)


@pytest.fixture(name="dense_ledger")
def dense_ledger_fixture() -> LocalOpinionLedger:
    """
    A 100-peer ledger in which every peer rated about a tenth of the others.

    Returns:
        LocalOpinionLedger: counts drawn from a fixed seed, zero diagonal.
    """
    rng = np.random.default_rng(11)
    counts = rng.integers(0, 6, size=(100, 100)).astype(float)
    counts *= rng.random((100, 100)) < 0.1
    np.fill_diagonal(counts, 0.0)
    ledger = LocalOpinionLedger.empty(100)
    ledger.counts[:] = counts
    return ledger
