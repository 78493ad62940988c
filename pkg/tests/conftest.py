import pytest

from primearcs.primes import build_table


@pytest.fixture(scope="session")
def table():
    """Mid-size prime table shared by most tests."""
    return build_table(300_000)


@pytest.fixture(scope="session")
def table_large():
    """Covers the full-scale acceptance searches (primes to 1.05e6)."""
    return build_table(1_050_000)
