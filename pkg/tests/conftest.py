import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from diwbench.sensor import SensorSpec  # noqa: E402


@pytest.fixture
def cap_spec():
    return SensorSpec.default("capacitive")


@pytest.fixture
def res_spec():
    return SensorSpec.default("resistive")
