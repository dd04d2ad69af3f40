import os

import pytest
from hypothesis import HealthCheck, settings

from fusionlab.config_manager import reset_config_manager
from fusionlab.core.construct import ising_category, metric_group_category
from fusionlab.core.abelian import FiniteAbelianGroup, QuadraticForm, standard_form

settings.register_profile("dev", max_examples=25, deadline=None)
settings.register_profile(
    "ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the full-zoo tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: builds the full default zoo")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Every test gets its own configuration directory and zoo."""
    monkeypatch.setenv("FUSIONLAB_HOME", str(tmp_path / "home"))
    monkeypatch.delenv("FUSIONLAB_ZOO_DIR", raising=False)
    reset_config_manager()
    yield
    reset_config_manager()


@pytest.fixture
def ising():
    return ising_category(1)


@pytest.fixture
def svect():
    z2 = FiniteAbelianGroup.cyclic(2)
    return metric_group_category(z2, QuadraticForm.diagonal(z2, [2]), "sVec")


@pytest.fixture
def semion():
    z2 = FiniteAbelianGroup.cyclic(2)
    return metric_group_category(z2, QuadraticForm.diagonal(z2, [1]), "semion")


@pytest.fixture
def z3():
    return metric_group_category(FiniteAbelianGroup.cyclic(3), standard_form(3), "Z3")
