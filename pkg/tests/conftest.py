import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def wellformed():
    from helmfep.grammar import enumerate_wellformed

    return enumerate_wellformed()


@pytest.fixture(scope="session")
def stage1_model(wellformed):
    """Default stage-I training for seed 0, shared across the session."""
    from helmfep.training import TrainConfig, train_stage1

    gen, rec, _ = train_stage1(TrainConfig(seed=0), wellformed, trace=False)
    return gen, rec


CRITERIA = {}


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion."""

    def record(number, passed, detail):
        CRITERIA[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
