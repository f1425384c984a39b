import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from containment_ref import load_scenario, run

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"


@pytest.fixture(scope="session")
def stationary_config():
    return load_scenario(SCENARIO_DIR / "stationary_triangle.json")


@pytest.fixture(scope="session")
def circle_config():
    return load_scenario(SCENARIO_DIR / "circling_triangle.json")


@pytest.fixture(scope="session")
def stationary_run(stationary_config):
    """Full reference run with stationary leaders, plus its wall time."""
    t0 = time.perf_counter()
    result = run(stationary_config)
    elapsed = time.perf_counter() - t0
    return result, elapsed


@pytest.fixture(scope="session")
def circle_run(circle_config):
    """Full reference run with circling leaders, plus its wall time."""
    t0 = time.perf_counter()
    result = run(circle_config)
    elapsed = time.perf_counter() - t0
    return result, elapsed
