import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from mgcp.fractional_variants import FractionalOrders  # noqa: E402
from mgcp.gcp_core import MultiTime, RateMatrix  # noqa: E402
from mgcp.samplers import RngStream  # noqa: E402


@pytest.fixture
def rates():
    return RateMatrix.from_array([[1.0, 2.0], [3.0, 4.0]])


@pytest.fixture
def point():
    return MultiTime(t=(0.5, 0.7))


@pytest.fixture
def orders():
    return FractionalOrders(alpha=(0.5, 0.8))


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def minimal_config():
    return {"k": 1, "d": 1, "rates": [[1.0]], "variant": "base", "t": [1.0]}


@pytest.fixture
def config_file(tmp_path):
    """Write a JSON experiment file and return its path"""
    def write(data, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return write
