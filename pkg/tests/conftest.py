import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from strategies import make_economy

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

DATA_DIR = Path(__file__).parent.parent / "data"


def five_buyer_market():
    """The running example: five buyers, items a-d, tight cap on c."""
    return make_economy(
        [
            [4, 3, 5, 7],
            [7, 6, 8, 3],
            [5, 5, 8, 7],
            [9, 4, 3, 2],
            [6, 2, 4, 10],
        ],
        [5, 4, 1, 5],
        [6, 6, 4, 7],
    )


@pytest.fixture
def market():
    return five_buyer_market()


@pytest.fixture
def data_dir():
    return DATA_DIR
