import numpy as np
import pytest

from roughmax import generate, identity_growth, make_growth


@pytest.fixture(scope="session")
def g15():
    return make_growth("pure", 1.5)


@pytest.fixture(scope="session")
def phi15(g15):
    return g15.inverse()


@pytest.fixture(scope="session")
def g102():
    return make_growth("pure", 1.02)


@pytest.fixture(scope="session")
def phi102(g102):
    return g102.inverse()


@pytest.fixture(scope="session")
def g105():
    return make_growth("pure", 1.05)


@pytest.fixture(scope="session")
def phi105(g105):
    return g105.inverse()


@pytest.fixture(scope="session")
def glog():
    return make_growth("powerlog", 1.02, 1.0, a=1.0, x0=3.0)


@pytest.fixture(scope="session")
def philog(glog):
    return glog.inverse()


@pytest.fixture(scope="session")
def s15_small(g15):
    return generate(g15, 11)


@pytest.fixture(scope="session")
def s15_1m(g15):
    return generate(g15, 10 ** 6 + 1)


@pytest.fixture(scope="session")
def s102_16(g102):
    return generate(g102, 1 << 16)


@pytest.fixture(scope="session")
def s102_22(g102):
    """Shared heavy set: supports kernels up to scale 2^20."""
    return generate(g102, 1 << 22)


@pytest.fixture(scope="session")
def s105_20(g105):
    return generate(g105, 1 << 20)


@pytest.fixture(scope="session")
def gident():
    return identity_growth()


@pytest.fixture(scope="session")
def phident(gident):
    return gident.inverse()


@pytest.fixture(scope="session")
def sident(gident):
    return generate(gident, 1 << 12)


@pytest.fixture()
def rng():
    return np.random.default_rng(0xC0FFEE)
