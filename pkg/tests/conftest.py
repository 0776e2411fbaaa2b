from __future__ import annotations

import pytest
import yaml

from xborder.simkit import load_config
from xborder.simkit.config import default_config_text


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def raw_doc():
    return yaml.safe_load(default_config_text())


@pytest.fixture(scope="session")
def registry(config):
    return config.registry


@pytest.fixture(scope="session")
def graph(config):
    return config.graph


@pytest.fixture(scope="session")
def full_run(config):
    """One default run shared by the report, CLI and acceptance tests."""
    from xborder.simkit import run_all

    return run_all(config)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
