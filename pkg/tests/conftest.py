import pytest

import randova as rv


@pytest.fixture(scope="session")
def tables():
    """The four bundled reference tables."""
    return rv.load_bundled_tables()
