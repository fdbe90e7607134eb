""" Pytest configuration settings """
from contextlib import contextmanager
from pathlib import Path

import pytest
import yaml

FIXTURES = Path(__file__).resolve().parent / "scenario_fixtures.yaml"


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: mark test as slow to run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        # --runslow given in cli: do not skip slow tests
        return
    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def load_scenario(name: str) -> dict:
    """
    Loads a named entry of scenario_fixtures.yaml

    Args:
        name (str)
    Returns:
        (dict): empty if the name is not defined
    """
    with open(FIXTURES) as f:
        return yaml.safe_load(f).get(name) or {}


@pytest.fixture
def scenario():
    """
    Gives tests access to the named scenarios

    Returns:
        (Callable[[str], dict])
    """
    return load_scenario


@contextmanager
def not_raises(exception):
    """ Opposite of pytest raises for when everything works fine """
    try:
        yield
    except exception:
        raise pytest.fail(f"DID RAISE {exception}")
