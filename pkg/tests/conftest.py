import pytest

from ntn_harq.bler import default_table


@pytest.fixture(scope="session")
def table():
    return default_table()
