from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tariff_engine import synthetic


@pytest.fixture(scope="session")
def two_region():
    return synthetic.two_region_one_sector()


@pytest.fixture(scope="session")
def three_region():
    return synthetic.three_region_two_sector()


@pytest.fixture(scope="session")
def world17x15():
    return synthetic.synthetic_world()


@pytest.fixture(scope="session")
def demo_inputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo_inputs")
    return synthetic.write_demo_inputs(out)
