import numpy as np
import pytest

from egoforecast.datagen import WorldConfig, generate_dataset


@pytest.fixture(scope="session")
def world_cfg():
    return WorldConfig()


@pytest.fixture(scope="session")
def small_samples(world_cfg):
    """48 generated windows shared by the fast training tests."""
    samples, manifest = generate_dataset(world_cfg, n_samples=48,
                                         master_seed=11)
    return samples, manifest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from . import test_acceptance
    except ImportError:
        try:
            import test_acceptance
        except ImportError:
            return
    lines = getattr(test_acceptance, "RESULT_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
