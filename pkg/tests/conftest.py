import os

import pytest

from uie.simulation import SimConfig
from uie.tracking import MotionParams, TrackerConfig
from tests.utils import get_output, clear_output


@pytest.fixture(autouse=True, scope="function")
def output_directory():
    """ Cached runs and written tables never leak from one test to the next """
    if os.path.exists(get_output("")):
        clear_output()
    yield get_output("")
    if os.path.exists(get_output("")):
        clear_output()


@pytest.fixture
def small_config() -> SimConfig:
    """ 30x30 scenario with a per-step reporting sink, a few milliseconds per run """
    return SimConfig(
        grid=(30, 30), sink_start=(25, 25), target_start=(4, 4), params=MotionParams(4, 2),
        tracker=TrackerConfig(1)
    )
