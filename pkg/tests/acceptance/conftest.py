"""
Shared runs for the acceptance suite.

The ten default-configuration runs behind the reputation and correct-rate
criteria are computed once per session, in a process pool.
"""

import os
from concurrent.futures import ProcessPoolExecutor

import pytest

from coutile.core.config import SimConfig
from coutile.models.metrics import RunMetrics
from coutile.services.simnet import run_simulation

SEEDS = list(range(1, 11))
FURTHER_SEEDS = list(range(11, 21))


def pool_size() -> int:
    return max(1, min(len(SEEDS), os.cpu_count() or 1))


@pytest.fixture(name="default_runs", scope="session")
def default_runs_fixture(tmp_path_factory) -> list[RunMetrics]:
    """Rational-mode runs with every default (n=100, m=10, r=3, T=250) for ten seeds."""
    output_dir = tmp_path_factory.mktemp("default-runs")
    configs = [SimConfig(seed=seed, output_dir=output_dir) for seed in SEEDS]
    with ProcessPoolExecutor(max_workers=pool_size()) as pool:
        return list(pool.map(run_simulation, configs))


@pytest.fixture(name="further_runs", scope="session")
def further_runs_fixture(tmp_path_factory) -> list[RunMetrics]:
    """Ten more default runs, seeds 11 to 20, for the twenty-seed criteria."""
    output_dir = tmp_path_factory.mktemp("further-runs")
    configs = [
        SimConfig(seed=seed, output_dir=output_dir) for seed in FURTHER_SEEDS
    ]
    with ProcessPoolExecutor(max_workers=pool_size()) as pool:
        return list(pool.map(run_simulation, configs))
