"""Used to make pytest functions available globally."""

#  Copyright (c) 2021 robfit

import pytest

try:
    import pytest_randomly
except ImportError:
    pass
else:
    import robfit

    pytest_randomly.random_seeder = [robfit.settings.set_seed]


@pytest.fixture(autouse=True)
def setup_teardown():
    import robfit
    old_n_cpu = robfit.run.n_cpu
    old_parallel = robfit.run.mode.parallel
    old_verbosity = robfit.settings.get_verbosity()

    yield

    robfit.run.set_n_cpu(old_n_cpu)
    robfit.run.mode.parallel = old_parallel
    robfit.settings.set_verbosity(old_verbosity)


def pytest_addoption(parser):
    parser.addoption("--longtests", action="store", default=False)


@pytest.fixture(scope='session')
def table():
    from robfit.core.partition import default_table
    return default_table()


@pytest.fixture
def seeds(pytestconfig):
    """Seeds of the statistical tests: 20 with --longtests, a subset with the same thresholds otherwise."""
    if pytestconfig.getoption("longtests"):
        return list(range(20))
    return list(range(5))
