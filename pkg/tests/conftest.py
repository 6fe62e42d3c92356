import pytest

from traceblocks import timefreq


@pytest.fixture(scope="session")
def grid512():
    return timefreq.SampleGrid(16.0, 512)


@pytest.fixture(scope="session")
def gaussian512(grid512):
    return timefreq.sample_gaussian(grid512)


@pytest.fixture(scope="session")
def tight512(gaussian512):
    return timefreq.tight_window(gaussian512, 0.5, 1.0)


@pytest.fixture(scope="session")
def family78(tight512):
    # 78 members support every h_{n,k} with n <= 12
    return timefreq.wilson_family(tight512, 78)
