import pytest

from hymas.bench import gen_running_example


@pytest.fixture(scope="session")
def running():
    """The running-example CGS and its formula."""
    return gen_running_example()


@pytest.fixture(scope="session")
def running_cgs(running):
    return running[0]
