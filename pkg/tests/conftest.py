import pytest

from schottkyzeta.geometry.schottky import build_funneled_torus, build_three_funnel
from schottkyzeta.geometry.words import build_class_table, build_length_cache

NMAX = 8
NMAX_DEEP = 12


@pytest.fixture(scope="session")
def class_tables():
    """
    Class tables of the two-generator free group for n = 1..8
    """
    return {n: build_class_table(2, n) for n in range(1, NMAX + 1)}


@pytest.fixture(scope="session")
def deep_class_tables(class_tables):
    """
    Class tables for n = 1..12, only built by the slow tests
    """
    return {
        **class_tables,
        **{n: build_class_table(2, n) for n in range(NMAX + 1, NMAX_DEEP + 1)},
    }


@pytest.fixture(scope="session")
def x121314():
    return build_three_funnel(12, 13, 14)


@pytest.fixture(scope="session")
def x121314_cache(x121314, class_tables):
    return build_length_cache(x121314, NMAX, tables=class_tables)


@pytest.fixture(scope="session")
def x121212_cache(class_tables):
    return build_length_cache(build_three_funnel(12, 12, 12), NMAX, tables=class_tables)


@pytest.fixture(scope="session")
def y_torus():
    return build_funneled_torus(12, 13, 1.5707963267948966, phi_text="pi/2")
