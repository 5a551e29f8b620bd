import pytest

from tvmrf.dp import warmup


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    # absorb JIT compilation before any timed or tight-tolerance test
    warmup()
