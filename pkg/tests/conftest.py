import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mtjsc.converter import ConverterConfig, SensorParams, solve_attempt_time  # noqa: E402
from mtjsc.device import MtjParams  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture
def mtj():
    return MtjParams()


@pytest.fixture
def sensor():
    return SensorParams()


@pytest.fixture
def conv_cfg(sensor, mtj):
    return ConverterConfig(t_write=solve_attempt_time(sensor, mtj, 0.4), v_bias=0.4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def test_image_path():
    return DATA / "camera128.pgm"


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
