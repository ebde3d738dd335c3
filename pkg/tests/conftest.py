import pytest

from churnkit import datasets


@pytest.fixture
def ten():
    """Ten-player sample at one-second resolution."""
    return datasets.ten_players()

