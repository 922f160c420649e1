import numpy as np
import pytest

from akkt.families import build, infeasible_1d_spec, qp_2d_spec

SEED = 42


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def qp2d():
    return build(qp_2d_spec())


@pytest.fixture(scope="session")
def infeasible1d():
    return build(infeasible_1d_spec())
