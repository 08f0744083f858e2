import numpy as np
import pytest

from hris_placement import ChannelSet, SystemConfig

ACCEPTANCE_LINES = []


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_channels(rng, M, N, direct=1.0):
    """Unit-variance i.i.d. Rayleigh links (direct link scaled by ``direct``)."""
    return ChannelSet(H_br=cn(rng, N, M), h_ru=cn(rng, N), h_bu=direct * cn(rng, M), ue_position=np.zeros(3))


def random_config(rng, M, N, L, **kw):
    params = dict(
        M=M, N=N, L=L,
        eta=float(rng.uniform(1.0, 5.0)),
        P_t=float(10 ** rng.uniform(-1, 1)),
        P_ris_max=1e30,
        sigma2=float(10 ** rng.uniform(-1, 1)),
        nu2=float(10 ** rng.uniform(-2, 0)),
    )
    params.update(kw)
    return SystemConfig(**params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
